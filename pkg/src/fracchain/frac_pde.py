"""Spectral solver for the fractional heat equation on a periodic box.

Fourier convention: W~(p) = int exp(-2 pi i p y) W(y) dy with ordinary
frequencies p_j = j / L. A field evolves by

    W~(p, t) = exp(-kappa |p|^alpha t) W~(p, 0),

so kappa is the multiplier in the ordinary-frequency variable. In that
variable -(2 pi)^-alpha C (-Delta)^(alpha/2) has symbol -C |p|^alpha, which
makes kappa = C. The flight-process representation E u0(y + Z / N) instead
needs kappa = (2 pi)^alpha C_big (see kinetic_mc.homogenized_kappa).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .params import AliasWarning, DomainError, GridMismatch

_ALIAS_TOL = 1e-10
_IMAG_TOL = 1e-12


@dataclass(frozen=True)
class FracField:
    """Fourier coefficients W~(p_j, t) for j = -n/2 .. n/2 - 1 on a box of length L.

    The initial coefficients and the elapsed time are stored so that repeated
    evolution composes exactly: evolve(a) then evolve(b) equals evolve(a + b).
    """

    domain_length: float
    n_modes: int
    coeffs0: np.ndarray
    time: float
    alpha: float
    kappa: float

    def __post_init__(self):
        n = self.n_modes
        if n < 2 or n & (n - 1):
            raise DomainError("n_modes must be a power of two")
        if not self.domain_length > 0:
            raise DomainError("domain_length must be positive")
        if not 0.0 < self.alpha <= 2.0:
            raise DomainError("alpha must lie in (0, 2]")
        if not self.kappa > 0:
            raise DomainError("kappa must be positive")
        if self.time < 0:
            raise DomainError("time must be non-negative")
        c = np.array(self.coeffs0, dtype=complex)
        if c.shape != (n,):
            raise DomainError("coeffs0 must have length n_modes")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs0", c)

    @property
    def p(self) -> np.ndarray:
        return frequencies(self.n_modes, self.domain_length)

    @property
    def coeffs(self) -> np.ndarray:
        return self.coeffs0 * self.multiplier(self.time)

    def multiplier(self, t: float) -> np.ndarray:
        return np.exp(-self.kappa * np.abs(self.p) ** self.alpha * t)

    @property
    def dy(self) -> float:
        return self.domain_length / self.n_modes

    @property
    def y(self) -> np.ndarray:
        return grid(self.n_modes, self.domain_length)

    def mass(self) -> float:
        """int W dy, the p = 0 coefficient."""
        return float(self.coeffs[self.n_modes // 2].real)


def frequencies(n: int, L: float) -> np.ndarray:
    return np.arange(-n // 2, n // 2) / L


def grid(n: int, L: float) -> np.ndarray:
    return -L / 2 + np.arange(n) * (L / n)


def from_real_space(values, domain_length: float, alpha: float, kappa: float) -> FracField:
    """Build a field from samples on grid(n, L) (rectangle-rule transform)."""
    v = np.asarray(values, float)
    n = v.size
    L = float(domain_length)
    y = grid(n, L)
    # W~(p_j) = dy sum_m W(y_m) exp(-2 pi i p_j y_m); y_m = -L/2 + m dy
    c = np.fft.fftshift(np.fft.fft(v)) * (L / n)
    j = np.arange(-n // 2, n // 2)
    c = c * np.exp(-2j * math.pi * j * y[0] / L)
    field = FracField(L, n, _split_nyquist(c), 0.0, alpha, kappa)
    tail = np.max(np.abs(c[[0]])) / max(np.max(np.abs(c)), 1e-300)
    if tail > _ALIAS_TOL:
        warnings.warn(f"spectral tail at the Nyquist frequency is {tail:.2e}", AliasWarning,
                      stacklevel=2)
    return field


def from_function(fn, domain_length: float, n_modes: int, alpha: float, kappa: float) -> FracField:
    return from_real_space(fn(grid(n_modes, domain_length)), domain_length, alpha, kappa)


def from_coefficients(coeffs, domain_length: float, alpha: float, kappa: float) -> FracField:
    c = np.asarray(coeffs, complex)
    field = FracField(float(domain_length), c.size, c, 0.0, alpha, kappa)
    tail = abs(c[0]) / max(np.max(np.abs(c)), 1e-300)
    if tail > _ALIAS_TOL:
        warnings.warn(f"spectral tail at the Nyquist frequency is {tail:.2e}", AliasWarning,
                      stacklevel=2)
    return field


def _split_nyquist(c):
    # the -n/2 mode of a real field is real; keep it as a cosine (half at +-p)
    c = c.copy()
    c[0] = c[0].real
    return c


def evolve(field: FracField, dt: float) -> FracField:
    """Exact semigroup step; the p = 0 mode is untouched."""
    if dt < 0:
        raise DomainError("dt must be non-negative")
    return FracField(field.domain_length, field.n_modes, field.coeffs0, field.time + dt,
                     field.alpha, field.kappa)


def to_real_space(field: FracField, y_grid=None) -> np.ndarray:
    """W(y) = (1/L) sum_j W~(p_j) exp(2 pi i p_j y).

    y_grid=None uses the native grid (FFT); otherwise the sum is evaluated at
    the given points, which must lie in [-L/2, L/2). The Nyquist mode enters
    as a cosine so the result is real.
    """
    L = field.domain_length
    n = field.n_modes
    c = field.coeffs
    if y_grid is None:
        y = field.y
        j = np.arange(-n // 2, n // 2)
        d = c * np.exp(2j * math.pi * j * y[0] / L)
        vals = np.fft.ifft(np.fft.ifftshift(d)) * (n / L)
        # ifft puts the Nyquist mode in as exp(-i pi m); its cosine is (-1)^m already
    else:
        y = np.asarray(y_grid, float)
        if np.any(y < -L / 2) or np.any(y >= L / 2):
            raise DomainError("y_grid must lie in [-L/2, L/2)")
        p = field.p
        ph = np.exp(2j * math.pi * np.outer(y, p))
        ph[:, 0] = np.cos(2 * math.pi * y * p[0])
        vals = ph @ c / L
    imag = np.max(np.abs(vals.imag)) if vals.size else 0.0
    scale = max(np.max(np.abs(vals.real)), 1e-300) if vals.size else 1.0
    if imag > _IMAG_TOL * max(scale, 1.0):
        raise DomainError(f"imaginary residue {imag:.2e} exceeds tolerance")
    return np.ascontiguousarray(vals.real)


def compare_l2(a, b, dy: float) -> float:
    """sqrt(sum (a - b)^2 dy) on a shared uniform grid."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if a.shape != b.shape:
        raise GridMismatch(f"grids differ: {a.shape} vs {b.shape}")
    return float(math.sqrt(np.sum((a - b) ** 2) * dy))


def heat_kernel_gaussian(y, t: float, kappa: float, sigma0: float, mass: float = 1.0):
    """Closed form for alpha = 2: a Gaussian of variance sigma0^2 + kappa t / (2 pi^2).

    exp(-kappa p^2 t) in ordinary frequency is a Gaussian of variance
    kappa t / (2 pi^2) in y.
    """
    var = sigma0**2 + kappa * t / (2.0 * math.pi**2)
    y = np.asarray(y, float)
    return mass * np.exp(-0.5 * y * y / var) / math.sqrt(2.0 * math.pi * var)


def boundary_mass(field: FracField) -> float:
    """Mass of |W| within L/4 of the box edge, relative to the total mass of |W|."""
    w = to_real_space(field)
    y = field.y
    L = field.domain_length
    edge = np.abs(y) >= L / 4
    tot = np.sum(np.abs(w))
    return float(np.sum(np.abs(w[edge])) / tot) if tot > 0 else 0.0


def self_similar_profiles(field: FracField, times, theta_exponent: float, xs):
    """Profiles t^(1/alpha) W(x t^(1/alpha), t) sampled at scaled points xs.

    theta_exponent is the space-time exponent (1/alpha = (7-theta)/6 for the
    flight scaling). Profiles from a point-like initial field collapse.
    """
    out = []
    for t in times:
        f = evolve(field, t)
        s = t**theta_exponent
        out.append(s * to_real_space(f, np.asarray(xs) * s))
    return np.array(out)
