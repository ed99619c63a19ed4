"""Periodic harmonic chain with long-range couplings and momentum-exchange noise.

Fourier convention on Z_n: f^_j = sum_x f_x exp(-2 pi i j x / n), k_j = j / n,
and integrals over the torus become (1/n) sum_j. The periodized coupling has
symbol a_hat_n(j) = a_hat(j / n) exactly, so mode frequencies come straight
from the dispersion module.

Noise. The triple (p_{x-1}, p_x, p_{x+1}) is moved by the vector field
Y_x p = p x (1, 1, 1), a rotation about (1, 1, 1)/sqrt(3). The step applies
exp(a_x Y_x) exactly with a_x = sqrt(gamma dt) xi_x, sweeping x upwards.
This is the Stratonovich form of the Ito equation with drift
-(gamma/2)(beta * p), whose generator is (gamma/2) sum_x Y_x^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numba as nb
import numpy as np
from scipy import special

from . import dispersion
from .params import DomainError, InsufficientReplicas, ModelParams

_SQRT3 = math.sqrt(3.0)


def periodize_alpha(params: ModelParams, n: int) -> np.ndarray:
    """alpha_per[x] = -sum_m |x + m n|^-theta for x != 0; alpha_per[0] makes rows sum to 0.

    The lattice sum over m is n^-theta (zeta(theta, x/n) + zeta(theta, 1 - x/n))
    with the Hurwitz zeta function.
    """
    if n < 8:
        raise DomainError("n must be at least 8")
    th = params.theta
    x = np.arange(1, n, dtype=float)
    s = n ** (-th) * (special.zeta(th, x / n) + special.zeta(th, 1.0 - x / n))
    s = 0.5 * (s + s[::-1])
    out = np.empty(n)
    out[1:] = -s
    out[0] = math.fsum(s)
    return out


def mode_symbol(params: ModelParams, n: int) -> np.ndarray:
    """a_hat_n(j) = a_hat(j / n) for j = 0..n-1."""
    j = np.arange(n)
    k = np.where(j <= n // 2, j, j - n) / n
    a = np.zeros(n)
    a[1:] = dispersion.a_hat(params, k[1:])
    return a


@dataclass(frozen=True)
class ChainState:
    n: int
    p: np.ndarray
    q: np.ndarray
    t: float
    gamma: float
    alpha_per: np.ndarray
    mode_freq: np.ndarray

    def __post_init__(self):
        if self.n < 8 or self.n & (self.n - 1):
            raise DomainError("n must be a power of two, at least 8")
        if self.gamma < 0:
            raise DomainError("gamma must be non-negative")
        for name in ("p", "q", "alpha_per", "mode_freq"):
            a = np.array(getattr(self, name), dtype=float)
            if a.shape != (self.n,):
                raise DomainError(f"{name} must have length n")
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def symbol(self) -> np.ndarray:
        return self.mode_freq**2


@dataclass(frozen=True)
class Lattice:
    """Couplings and spectrum shared by all states of one (theta, n)."""

    params: ModelParams
    n: int
    alpha_per: np.ndarray
    mode_freq: np.ndarray

    @classmethod
    def build(cls, params: ModelParams, n: int) -> "Lattice":
        a = mode_symbol(params, n)
        return cls(params, n, periodize_alpha(params, n), np.sqrt(a))

    def state(self, p, q, gamma: float, t: float = 0.0) -> ChainState:
        return ChainState(self.n, p, q, t, gamma, self.alpha_per, self.mode_freq)


def zero_state(params: ModelParams, n: int, gamma: float) -> ChainState:
    lat = Lattice.build(params, n)
    return lat.state(np.zeros(n), np.zeros(n), gamma)


def init_thermal(params: ModelParams, n: int, temperature: float, rng_seed, gamma: float = 0.0,
                 lattice: Lattice | None = None) -> ChainState:
    """Gibbs sample: p_x iid N(0, T); q^_j with E|q^_j|^2 = n T / a_hat_n(j), q^_0 = 0."""
    if not temperature > 0:
        raise DomainError("temperature must be positive")
    lat = lattice or Lattice.build(params, n)
    rng = np.random.default_rng(rng_seed)
    p = rng.standard_normal(n) * math.sqrt(temperature)
    w = np.fft.rfft(rng.standard_normal(n))
    a = lat.mode_freq[: n // 2 + 1] ** 2
    scale = np.zeros_like(a)
    scale[1:] = np.sqrt(temperature / a[1:])
    q = np.fft.irfft(w * scale, n)
    return lat.state(p, q, gamma)


def init_hot_spot(params: ModelParams, n: int, temperature: float, width: int, rng_seed,
                  gamma: float = 0.0, lattice: Lattice | None = None,
                  profile=None) -> ChainState:
    """q = 0; p_x ~ N(0, T) on the `width` central sites, zero elsewhere.

    With `profile`, p_x ~ N(0, T profile(x / n)) on every site instead.
    """
    lat = lattice or Lattice.build(params, n)
    rng = np.random.default_rng(rng_seed)
    xi = rng.standard_normal(n)
    if profile is not None:
        var = temperature * np.asarray(profile(np.arange(n) / n), float)
    else:
        var = np.zeros(n)
        lo = n // 2 - width // 2
        var[lo: lo + width] = temperature
    return lat.state(xi * np.sqrt(var), np.zeros(n), gamma)


# ----------------------------------------------------------------- dynamics

def _rotate_modes(q, p, w, dt):
    """Exact harmonic flow of the rfft coefficients; mode 0 moves freely."""
    qh = np.fft.rfft(q)
    ph = np.fft.rfft(p)
    n = q.size
    wm = w[: n // 2 + 1]
    c = np.cos(wm[1:] * dt)
    s = np.sin(wm[1:] * dt)
    qn = np.empty_like(qh)
    pn = np.empty_like(ph)
    qn[0] = qh[0] + ph[0] * dt
    pn[0] = ph[0]
    qn[1:] = qh[1:] * c + ph[1:] * (s / wm[1:])
    pn[1:] = ph[1:] * c - qh[1:] * (wm[1:] * s)
    return np.fft.irfft(qn, n), np.fft.irfft(pn, n)


def step_harmonic(state: ChainState, dt: float) -> ChainState:
    if not dt > 0:
        raise DomainError("dt must be positive")
    q, p = _rotate_modes(state.q, state.p, state.mode_freq, dt)
    return replace(state, q=q, p=p, t=state.t + dt)


@nb.njit(cache=True)
def _noise_sweep(p, a):
    """Apply exp(a_x Y_x) for x = 0..n-1 in order (periodic indices), in place."""
    n = p.size
    inv = 1.0 / _SQRT3
    for x in range(n):
        ax = a[x]
        if ax == 0.0:
            continue
        i0 = (x - 1) % n
        i2 = (x + 1) % n
        v0 = p[i0]
        v1 = p[x]
        v2 = p[i2]
        # flow of dv/ds = v x (1,1,1): rotation about u = (1,1,1)/sqrt3 by -sqrt3 s
        phi = -_SQRT3 * ax
        c = math.cos(phi)
        sn = math.sin(phi)
        m = (v0 + v1 + v2) / 3.0
        w0 = v0 - m
        w1 = v1 - m
        w2 = v2 - m
        # u x w
        c0 = (w2 - w1) * inv
        c1 = (w0 - w2) * inv
        c2 = (w1 - w0) * inv
        p[i0] = m + w0 * c + c0 * sn
        p[x] = m + w1 * c + c1 * sn
        p[i2] = m + w2 * c + c2 * sn


def noise_amplitudes(state: ChainState, dt: float, rng: np.random.Generator) -> np.ndarray:
    return math.sqrt(state.gamma * dt) * rng.standard_normal(state.n)


def apply_noise(p: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Rotate momenta with given per-site amplitudes a_x (copy)."""
    out = np.array(p, dtype=float)
    _noise_sweep(out, np.asarray(a, float))
    return out


def step_noise(state: ChainState, dt: float, rng_stream: np.random.Generator) -> ChainState:
    if not dt > 0:
        raise DomainError("dt must be positive")
    if state.gamma == 0.0:
        return state
    a = noise_amplitudes(state, dt, rng_stream)
    return replace(state, p=apply_noise(state.p, a))


def run(state: ChainState, dt: float, n_steps: int, rng_stream: np.random.Generator,
        observe=None, every: int = 1) -> ChainState:
    """Strang steps harmonic(dt/2) noise(dt) harmonic(dt/2).

    observe(step, q, p) is called after every `every` steps (and at step 0).
    """
    if not dt > 0:
        raise DomainError("dt must be positive")
    q = np.array(state.q)
    p = np.array(state.p)
    w = state.mode_freq
    amp = math.sqrt(state.gamma * dt)
    if observe is not None:
        observe(0, q, p)
    for i in range(n_steps):
        q, p = _rotate_modes(q, p, w, 0.5 * dt)
        if amp > 0:
            _noise_sweep(p, amp * rng_stream.standard_normal(state.n))
        q, p = _rotate_modes(q, p, w, 0.5 * dt)
        if observe is not None and (i + 1) % every == 0:
            observe(i + 1, q, p)
    return replace(state, q=q, p=p, t=state.t + n_steps * dt)


def default_dt(state: ChainState) -> float:
    return 0.1 / float(np.max(state.mode_freq))


# -------------------------------------------------------------- observables

def _circ_conv(a, b):
    return np.fft.irfft(np.fft.rfft(a) * np.fft.rfft(b), a.size)


def potential_energy(state: ChainState) -> float:
    """(1/2) sum_x q_x (alpha_per * q)_x via the mode symbol."""
    qh = np.fft.fft(state.q)
    return float(0.5 * np.sum(state.symbol * np.abs(qh) ** 2) / state.n)


def energy(state: ChainState) -> float:
    return float(0.5 * np.dot(state.p, state.p)) + potential_energy(state)


def total_momentum(state: ChainState) -> float:
    return math.fsum(state.p)


def pair_sums(state: ChainState) -> np.ndarray:
    """sum_{x'} alpha_per[x - x'] (q_x - q_x')^2 for every x (circular convolutions)."""
    a = state.alpha_per
    q = state.q
    return -2.0 * q * _circ_conv(a, q) + _circ_conv(a, q * q)


def pair_sums_dense(state: ChainState) -> np.ndarray:
    """Same quantity by the O(n^2) double sum."""
    n = state.n
    x = np.arange(n)
    d = (x[:, None] - x[None, :]) % n
    diff = state.q[:, None] - state.q[None, :]
    return (state.alpha_per[d] * diff * diff).sum(axis=1)


def site_energy(state: ChainState, x=None):
    """e_x = p_x^2 / 2 - (1/4) sum_{x' != x} alpha_per[x - x'] (q_x - q_x')^2."""
    e = 0.5 * state.p**2 - 0.25 * pair_sums(state)
    return e if x is None else float(e[x])


def pair_sums_spectral(state: ChainState) -> np.ndarray:
    """The same sums from the wave function through F(k, k').

    sum_{x'} alpha(q_x - q_x')^2 = (1/4) sum_{j,j'} n^-2 e^{2 pi i (j+j') x / n}
    F(k_j, k_j') (psi^(k_j) + psi^(-k_j)*) (psi^(k_j') + psi^(-k_j')*), with
    F = (a(k+k') - a(k) - a(k')) / (omega(k) omega(k')). Zero-mode terms vanish
    and are skipped.
    """
    n = state.n
    psi = wave_function(state)
    w = state.mode_freq
    a = state.symbol
    g = psi + np.conj(psi[(-np.arange(n)) % n])
    j = np.arange(1, n)
    s = (j[:, None] + j[None, :]) % n
    F = (a[s] - a[j][:, None] - a[j][None, :]) / (w[j][:, None] * w[j][None, :])
    M = 0.25 * F * g[j][:, None] * g[j][None, :]
    G = np.bincount(s.ravel(), weights=M.real.ravel(), minlength=n) + \
        1j * np.bincount(s.ravel(), weights=M.imag.ravel(), minlength=n)
    vals = np.fft.ifft(G) * n / n**2
    return vals.real


def wave_function(state: ChainState) -> np.ndarray:
    """psi^_j = omega_n(j) q^_j + i p^_j; the zero mode is pure momentum."""
    return state.mode_freq * np.fft.fft(state.q) + 1j * np.fft.fft(state.p)


def wave_norm(state: ChainState) -> float:
    """int |psi^|^2 dk = (1/n) sum_j |psi^_j|^2, which equals 2H."""
    return float(np.sum(np.abs(wave_function(state)) ** 2) / state.n)


def wave_real_space(state: ChainState) -> np.ndarray:
    return np.fft.ifft(wave_function(state))


@dataclass(frozen=True)
class WignerEstimate:
    kind: str
    grid: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    eps: float
    replicas: int


def estimate_wigner(states, kind: str) -> WignerEstimate:
    """(eps/2) E|psi^(k_j)|^2 on modes or (eps/2) E|psi_x|^2 on sites, eps = 1/n."""
    states = list(states)
    if len(states) < 30:
        raise InsufficientReplicas("at least 30 replicas are required")
    n = states[0].n
    eps = 1.0 / n
    if kind == "spectral_density":
        data = np.array([np.abs(wave_function(s)) ** 2 for s in states])
        grid = np.where(np.arange(n) <= n // 2, np.arange(n), np.arange(n) - n) / n
    elif kind == "energy_profile":
        data = np.array([np.abs(wave_real_space(s)) ** 2 for s in states])
        grid = np.arange(n) * eps
    else:
        raise ValueError("kind must be 'spectral_density' or 'energy_profile'")
    vals = 0.5 * eps * data.mean(axis=0)
    err = 0.5 * eps * data.std(axis=0, ddof=1) / math.sqrt(len(states))
    return WignerEstimate(kind=kind, grid=grid, values=vals, stderr=err, eps=eps,
                          replicas=len(states))


def thermal_condition_statistic(states) -> float:
    """eps^2 int |E|psi^(k)|^2|^2 dk over an ensemble."""
    states = list(states)
    n = states[0].n
    m = np.mean([np.abs(wave_function(s)) ** 2 for s in states], axis=0)
    return float(np.sum(m**2) / n / n**2)


def ensemble(make_state, replicas: int, seed: int):
    """States make_state(child_seed) for independent child seeds of `seed`."""
    seq = np.random.SeedSequence(seed)
    return [make_state(child) for child in seq.spawn(replicas)]


def replica_rngs(seed: int, replicas: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(replicas)]


def profile_variance(profile: np.ndarray, centre: float | None = None) -> float:
    """Spatial variance of a nonnegative profile on sites 0..n-1 (about its centre)."""
    n = profile.size
    x = np.arange(n, dtype=float)
    w = np.clip(profile, 0.0, None)
    mass = w.sum()
    mu = (w * x).sum() / mass if centre is None else centre
    return float((w * (x - mu) ** 2).sum() / mass)
