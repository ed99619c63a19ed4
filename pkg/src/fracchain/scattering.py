"""Scattering kernels of the momentum-exchange noise and the jump operator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PI = np.pi


def _sin2(x):
    s = np.sin(x)
    return s * s


def r_kernel(k, kp):
    """r(k,k') = 2 sin^2(pi k) sin(2 pi (k - k')) + 2 sin(2 pi k) sin^2(pi (k - k')).

    Equivalently 4 sin(pi k) sin(pi (k - k')) sin(pi (2k - k')), the Fourier
    coupling of the three-site noise.
    """
    k = np.asarray(k, float)
    kp = np.asarray(kp, float)
    d = k - kp
    return 2.0 * _sin2(PI * k) * np.sin(2 * PI * d) + 2.0 * np.sin(2 * PI * k) * _sin2(PI * d)


def R_pair(k, kp):
    """R(k,k') = (r(k, k+k')^2 + r(k, k-k')^2) / 2."""
    return 0.5 * (r_kernel(k, np.add(k, kp)) ** 2 + r_kernel(k, np.subtract(k, kp)) ** 2)


def R_mean(k):
    """R(k) = 2 sin^4(pi k) + 1.5 sin^2(2 pi k)."""
    s2 = _sin2(PI * np.asarray(k, float))
    return 2.0 * s2 * s2 + 1.5 * _sin2(2 * PI * np.asarray(k, float))


def e_basis(i: int, k):
    k = np.asarray(k, float)
    if i == 1:
        s2 = _sin2(PI * k)
        return (8.0 / 3.0) * s2 * s2
    if i == 2:
        return 2.0 * _sin2(2 * PI * k)
    raise ValueError("e_basis index must be 1 or 2")


def R_pair_decomposed(k, kp):
    """Rank-two form (3/4)(e1(k) e2(k') + e2(k) e1(k'))."""
    return 0.75 * (e_basis(1, k) * e_basis(2, kp) + e_basis(2, k) * e_basis(1, kp))


def R_p_kernel(k, kp, p):
    """R(k,k',p) = (1/2) sum_{iota=+-1} r(k+p/2, k+iota k') r(k-p/2, k+iota k')."""
    k, kp, p = np.broadcast_arrays(*(np.asarray(v, float) for v in (k, kp, p)))
    out = 0.0
    for iota in (1.0, -1.0):
        target = k + iota * kp
        out = out + r_kernel(k + 0.5 * p, target) * r_kernel(k - 0.5 * p, target)
    return 0.5 * out


def R_p_kernel_product(k, kp, p):
    """Product form 8(s_k - s_p)(s_k' - s_p)(sin^2 pi(k+k') + sin^2 pi(k-k') - 2 sin^2 pi p)."""
    k, kp, p = np.broadcast_arrays(*(np.asarray(v, float) for v in (k, kp, p)))
    sp = _sin2(0.5 * PI * p)
    return (8.0 * (_sin2(PI * k) - sp) * (_sin2(PI * kp) - sp)
            * (_sin2(PI * (k + kp)) + _sin2(PI * (k - kp)) - 2.0 * _sin2(PI * p)))


@dataclass(frozen=True)
class GridFunction:
    """Values on the torus grid k_j = -1/2 + j/n."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise ValueError("grid size must be even and at least 4")
        v = np.array(self.values)
        if v.shape != (self.n,):
            raise ValueError("values must have length n")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def k(self) -> np.ndarray:
        return grid(self.n)

    @classmethod
    def from_function(cls, n: int, fn) -> "GridFunction":
        return cls(n, np.asarray(fn(grid(n))))

    def integral(self):
        return np.sum(self.values) / self.n


def grid(n: int) -> np.ndarray:
    return -0.5 + np.arange(n) / n


def inner(g: GridFunction, f: GridFunction):
    """<g, f> = int g f dk by the rectangle rule (no conjugation)."""
    _same_grid(g, f)
    return np.sum(g.values * f.values) / f.n


def _same_grid(a: GridFunction, b: GridFunction):
    if a.n != b.n:
        raise ValueError("grid functions live on different grids")


def L_apply(f: GridFunction) -> GridFunction:
    """(L f)(k) = 2 int R(k,k') (f(k') - f(k)) dk' via the rank-two structure."""
    k = f.k
    e1, e2 = e_basis(1, k), e_basis(2, k)
    v = f.values
    m1 = np.sum(e1 * v) / f.n
    m2 = np.sum(e2 * v) / f.n
    out = 1.5 * (e1 * m2 + e2 * m1) - 2.0 * R_mean(k) * v
    return GridFunction(f.n, out)


def L_apply_dense(f: GridFunction) -> GridFunction:
    """O(n^2) double-sum evaluation of L, kept as a reference."""
    k = f.k
    kern = R_pair(k[:, None], k[None, :])
    v = f.values
    out = 2.0 * (kern * (v[None, :] - v[:, None])).sum(axis=1) / f.n
    return GridFunction(f.n, out)


def dirichlet_form(f: GridFunction) -> float:
    """E(f) = int f^* (-L f) dk."""
    lf = L_apply(f)
    return float(np.real(np.sum(np.conj(f.values) * -lf.values)) / f.n)


def dirichlet_form_double(f: GridFunction) -> float:
    """E(f) = int int R(k,k') |f(k) - f(k')|^2 dk dk'."""
    k = f.k
    kern = R_pair(k[:, None], k[None, :])
    d = np.abs(f.values[:, None] - f.values[None, :]) ** 2
    return float((kern * d).sum() / f.n**2)
