"""Event-driven simulation of the scattering process K(t) and the flight Z(t).

K jumps at rate 2 gamma0 R(K); the next wavenumber is drawn from
R(k, k') / R(k), which by the rank-two structure is the mixture
w e2 + (1 - w) e1 with w = e1(k) / (e1(k) + e2(k)). Between jumps
Z grows at speed omega'(K), so Z is accumulated exactly per holding interval
and there is no time step anywhere in this module.

Coefficient convention. Let X = Z(N t) / N(theta). Its characteristic
function in the angular variable xi, E exp(i xi X), tends to
exp(-C_big |xi|^alpha t), where C_big is resolvent.C_big. Equivalently, the
Boltzmann displacement Z / (2 pi) has exponent C_big |p|^alpha t in the
ordinary frequency p of the transform exp(-2 pi i p y). The homogenized
profile E[u0(y + X)] is therefore the fractional heat flow with multiplier
exp(-(2 pi)^alpha C_big |p|^alpha t) in ordinary frequency; see
homogenized_kappa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numba as nb
import numpy as np
from scipy import interpolate, optimize, stats

from . import dispersion, resolvent
from ._rng import RngStream, seed_to_uint, stream_key, uniform
from .params import (
    DegenerateState,
    DomainError,
    FitDegenerate,
    InsufficientReplicas,
    ModelParams,
    NoExceedance,
    require_theta_above_two,
    stable_index,
)

K_CLAMP = 1e-12
_TABLE_NODES = 4096
_TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------- kernels

# e1, e2 and R are polynomials in s2 = sin^2(pi k) (cos(pi k) >= 0 on the
# torus), so the kernels carry s = sin(pi k) alongside k.

@nb.njit(cache=True, inline="always")
def _R_of_s2(s2):
    return 2.0 * s2 * s2 + 6.0 * s2 * (1.0 - s2)


@nb.njit(cache=True, inline="always")
def _e1_of_s2(s2):
    return (8.0 / 3.0) * s2 * s2


@nb.njit(cache=True, inline="always")
def _e2_of_s2(s2):
    return 8.0 * s2 * (1.0 - s2)


@nb.njit(cache=True, inline="always")
def _clamp(k):
    if abs(k) < K_CLAMP:
        return K_CLAMP if k >= 0.0 else -K_CLAMP
    return k


@nb.njit(cache=True)
def _draw_component(which, key, ctr):
    """Rejection draw from density e1 (which=1, envelope 8/3) or e2 (envelope 2).

    Returns (k, sin(pi k), counter, proposals)."""
    props = 0
    while True:
        k = uniform(key, ctr) - 0.5
        v = uniform(key, ctr + np.uint64(1))
        ctr += np.uint64(2)
        props += 1
        s = math.sin(math.pi * k)
        s2 = s * s
        if which == 1:
            if v * (8.0 / 3.0) < _e1_of_s2(s2):
                return k, s, ctr, props
        else:
            if v * 2.0 < _e2_of_s2(s2):
                return k, s, ctr, props


@nb.njit(cache=True)
def _sample_next(k, s, key, ctr):
    s2 = s * s
    e1 = _e1_of_s2(s2)
    tot = e1 + _e2_of_s2(s2)
    if tot <= 0.0:
        return np.nan, np.nan, ctr, 0
    u = uniform(key, ctr)
    ctr += np.uint64(1)
    # weight e1(k)/(e1+e2) selects the e2 component
    which = 2 if u * tot < e1 else 1
    kn, sn, ctr, props = _draw_component(which, key, ctr)
    if abs(kn) < K_CLAMP:
        kn = _clamp(kn)
        sn = math.sin(math.pi * kn)
    return kn, sn, ctr, props


@nb.njit(cache=True)
def _holding(s, gamma0, key, ctr):
    u = uniform(key, ctr)
    return -math.log(u) / (2.0 * gamma0 * _R_of_s2(s * s)), ctr + np.uint64(1)


@nb.njit(cache=True)
def _sample_pi(key, ctr):
    # density (2/3) R on the torus; max R = 9/4 at sin^2 = 3/4, so the
    # acceptance probability is 4 R / 9
    while True:
        k = uniform(key, ctr) - 0.5
        v = uniform(key, ctr + np.uint64(1))
        ctr += np.uint64(2)
        s = math.sin(math.pi * k)
        if v * 2.25 < _R_of_s2(s * s):
            if abs(k) < K_CLAMP:
                k = _clamp(k)
                s = math.sin(math.pi * k)
            return k, s, ctr


@nb.njit(cache=True, inline="always")
def _wprime(k, coef, u0, du, pw):
    a = abs(k)
    u = math.log(a)
    x = (u - u0) / du
    n = coef.shape[1]
    i = int(x)
    if i < 0:
        i = 0
    elif i > n - 1:
        i = n - 1
    d = u - (u0 + i * du)
    v = ((coef[0, i] * d + coef[1, i]) * d + coef[2, i]) * d + coef[3, i]
    if pw != 0.0:
        v *= math.exp(-pw * u)
    return v if k > 0.0 else -v


@nb.njit(cache=True)
def _wprime_array(ks, coef, u0, du, pw):
    out = np.empty(ks.size)
    for i in range(ks.size):
        out[i] = _wprime(ks[i], coef, u0, du, pw)
    return out


@nb.njit(cache=True)
def _advance(k, sk, t_last, zs, zc, t_next, ctr, n_jumps, key, horizon, gamma0,
             coef, u0, du, pw, rec_k, rec_t):
    """Run the event loop until the next jump lies beyond `horizon`.

    Z up to the last jump is kept as a Neumaier pair (zs, zc). Jumps are
    written into rec_k / rec_t while there is room (pass empty arrays to skip).
    """
    n_rec = rec_k.size
    while t_next <= horizon:
        dz = _wprime(k, coef, u0, du, pw) * (t_next - t_last)
        t = zs + dz
        if abs(zs) >= abs(dz):
            zc += (zs - t) + dz
        else:
            zc += (dz - t) + zs
        zs = t
        t_last = t_next
        k, sk, ctr, _ = _sample_next(k, sk, key, ctr)
        if n_jumps < n_rec:
            rec_k[n_jumps] = k
            rec_t[n_jumps] = t_last
        n_jumps += 1
        tau, ctr = _holding(sk, gamma0, key, ctr)
        t_next = t_last + tau
    return k, sk, t_last, zs, zc, t_next, ctr, n_jumps


@nb.njit(cache=True, inline="always")
def _z_at(k, t_last, zs, zc, horizon, coef, u0, du, pw):
    return zs + (zc + _wprime(k, coef, u0, du, pw) * (horizon - t_last))


@nb.njit(cache=True, parallel=True)
def _run_batch(seed, idx0, k0s, horizon, gamma0, coef, u0, du, pw):
    n = k0s.size
    z = np.empty(n)
    kend = np.empty(n)
    nj = np.empty(n, dtype=np.int64)
    empty = np.empty(0)
    for i in nb.prange(n):
        key = stream_key(seed, np.uint64(idx0 + i))
        ctr = np.uint64(0)
        k = k0s[i]
        if math.isnan(k):
            k, sk, ctr = _sample_pi(key, ctr)
        else:
            k = _clamp(k)
            sk = math.sin(math.pi * k)
        tau, ctr = _holding(sk, gamma0, key, ctr)
        k, sk, t_last, zs, zc, t_next, ctr, n_j = _advance(
            k, sk, 0.0, 0.0, 0.0, tau, ctr, 0, key, horizon, gamma0, coef, u0, du, pw, empty, empty)
        z[i] = _z_at(k, t_last, zs, zc, horizon, coef, u0, du, pw)
        kend[i] = k
        nj[i] = n_j
    return z, kend, nj


@nb.njit(cache=True, parallel=True)
def _chain_batch(seed, idx0, k0s, n_steps):
    n = k0s.size
    out = np.empty((n, n_steps + 1))
    for i in nb.prange(n):
        key = stream_key(seed, np.uint64(idx0 + i))
        ctr = np.uint64(0)
        k = k0s[i]
        if math.isnan(k):
            k, sk, ctr = _sample_pi(key, ctr)
        else:
            sk = math.sin(math.pi * k)
        out[i, 0] = k
        for j in range(n_steps):
            k, sk, ctr, _ = _sample_next(k, sk, key, ctr)
            out[i, j + 1] = k
    return out


@nb.njit(cache=True)
def _component_batch(which, seed, n):
    key = stream_key(seed, np.uint64(0))
    ctr = np.uint64(0)
    out = np.empty(n)
    props = 0
    for i in range(n):
        k, _, ctr, p = _draw_component(which, key, ctr)
        out[i] = k
        props += p
    return out, props


@nb.njit(cache=True)
def _next_batch(k, seed, n):
    out = np.empty(n)
    s = math.sin(math.pi * k)
    for i in range(n):
        key = stream_key(seed, np.uint64(i))
        kn, _, _, _ = _sample_next(k, s, key, np.uint64(0))
        out[i] = kn
    return out


@nb.njit(cache=True)
def _holding_batch(k, gamma0, seed, n):
    out = np.empty(n)
    key = stream_key(seed, np.uint64(0))
    ctr = np.uint64(0)
    s = math.sin(math.pi * k)
    for i in range(n):
        out[i], ctr = _holding(s, gamma0, key, ctr)
    return out


# ------------------------------------------------------- omega' lookup table

@dataclass(frozen=True)
class OmegaPrimeTable:
    """Cubic spline of omega'(k) |k|^pw in u = log|k| on [log 1e-12, log 1/2]."""

    coef: np.ndarray
    u0: float
    du: float
    pw: float

    def __call__(self, k):
        kk = np.atleast_1d(np.asarray(k, float))
        out = _wprime_array(np.where(np.abs(kk) < K_CLAMP, np.copysign(K_CLAMP, kk), kk),
                            self.coef, self.u0, self.du, self.pw)
        return out if np.ndim(k) else float(out[0])


@lru_cache(maxsize=32)
def omega_prime_table(params: ModelParams, nodes: int = _TABLE_NODES) -> OmegaPrimeTable:
    require_theta_above_two(params)
    u_lo, u_hi = math.log(K_CLAMP), math.log(0.5)
    u = np.linspace(u_lo, u_hi, nodes)
    ks = np.exp(u)
    pw = (3.0 - params.theta) / 2.0 if params.theta < 3.0 else 0.0
    vals = dispersion.omega_prime(params, ks) * ks**pw
    spl = interpolate.CubicSpline(u, vals)
    coef = np.ascontiguousarray(spl.c)
    coef.setflags(write=False)
    return OmegaPrimeTable(coef=coef, u0=u_lo, du=float(u[1] - u[0]), pw=pw)


def _table_args(params):
    tab = omega_prime_table(params)
    return tab.coef, tab.u0, tab.du, tab.pw


# ------------------------------------------------------------- primitives

def _check_k(k):
    if k == 0.0:
        raise DegenerateState("k = 0 is absorbing for the scattering process")


def mixture_weights(k):
    """(weight of the e2 component, weight of the e1 component) at k."""
    s2 = math.sin(math.pi * float(k)) ** 2
    e1 = float(_e1_of_s2(s2))
    e2 = float(_e2_of_s2(s2))
    if e1 + e2 == 0.0:
        raise DegenerateState("k = 0 is absorbing for the scattering process")
    return e1 / (e1 + e2), e2 / (e1 + e2)


def sample_next_k(params: ModelParams, k: float, rng_stream: RngStream) -> float:
    """Exact draw from P(k, dk') = R(k, k') / R(k) dk'."""
    _check_k(k)
    kn, _, ctr, _ = _sample_next(float(k), math.sin(math.pi * float(k)), rng_stream.key,
                                 np.uint64(rng_stream.counter))
    rng_stream.counter = int(ctr)
    return float(kn)


def sample_next_k_many(k: float, n: int, seed: int) -> np.ndarray:
    """n independent draws of the next state from k (stream index = draw index)."""
    _check_k(k)
    return _next_batch(float(k), seed_to_uint(seed), int(n))


def component_draws(which: int, n: int, seed: int):
    """n draws from density e1 (which=1) or e2 (which=2) and the acceptance rate."""
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    ks, props = _component_batch(which, seed_to_uint(seed), int(n))
    return ks, n / props


def holding_time(params: ModelParams, k: float, rng_stream: RngStream) -> float:
    """Exp(1) / (2 gamma0 R(k))."""
    _check_k(k)
    tau, ctr = _holding(math.sin(math.pi * float(k)), params.gamma0, rng_stream.key,
                        np.uint64(rng_stream.counter))
    rng_stream.counter = int(ctr)
    return float(tau)


def holding_times(params: ModelParams, k: float, n: int, seed: int) -> np.ndarray:
    _check_k(k)
    return _holding_batch(float(k), params.gamma0, seed_to_uint(seed), int(n))


def invariant_density(k):
    """pi(k) = (2/3) R(k), invariant for the jump chain K_n."""
    from .scattering import R_mean

    return (2.0 / 3.0) * R_mean(k)


def invariant_cdf(k):
    """CDF of pi on [-1/2, 1/2)."""
    k = np.asarray(k, float)
    return 0.5 + np.sign(k) * _R_antiderivative(np.abs(k)) * (2.0 / 3.0)


def _R_antiderivative(k):
    """int_0^k R(x) dx for 0 <= k <= 1/2 without cancellation at small k.

    R = 2 sin^2(pi k) + sin^2(2 pi k), so the integral is
    (x - sin x) / (2 pi) + (y - sin y) / (8 pi) with x = 2 pi k, y = 4 pi k.
    """
    k = np.asarray(k, float)
    return _x_minus_sin(_TWO_PI * k) / _TWO_PI + _x_minus_sin(4 * math.pi * k) / (8 * math.pi)


def _x_minus_sin(x):
    x = np.asarray(x, float)
    small = np.abs(x) < 0.5
    xs = np.where(small, x, 0.0)
    x2 = xs * xs
    # x^3/3! - x^5/5! + ... to 17 terms is exact to rounding for |x| < 0.5
    series = np.zeros_like(xs)
    term = xs * x2 / 6.0
    for j in range(1, 18):
        series = series + term
        term = -term * x2 / ((2 * j + 2) * (2 * j + 3))
    return np.where(small, series, x - np.sin(x))


def sample_pi(n: int, seed: int) -> np.ndarray:
    """n draws from pi by rejection (stream index = draw index)."""
    return _chain_batch(seed_to_uint(seed), 0, np.full(int(n), np.nan), 0)[:, 0]


def jump_chain(n_chains: int, n_steps: int, seed: int, k0=None) -> np.ndarray:
    """(n_chains, n_steps + 1) array of the embedded chain K_0, ..., K_n.

    k0=None starts every chain from pi."""
    if k0 is None:
        k0s = np.full(int(n_chains), np.nan)
    else:
        k0s = np.broadcast_to(np.asarray(k0, float), (int(n_chains),)).copy()
        if np.any(k0s == 0.0):
            raise DegenerateState("k = 0 is absorbing for the scattering process")
    return _chain_batch(seed_to_uint(seed), 0, k0s, int(n_steps))


# ------------------------------------------------------------ trajectories

@dataclass(frozen=True)
class TrajectoryState:
    """Everything needed to resume a trajectory bit-for-bit."""

    k: float
    sin_k: float
    t_last: float
    z_sum: float
    z_comp: float
    t_next: float
    counter: int
    n_jumps: int
    time: float


@dataclass(frozen=True)
class JumpTrajectory:
    states: np.ndarray
    jump_times: np.ndarray
    z_end: float
    horizon: float
    state: TrajectoryState = field(repr=False)

    @property
    def n_jumps(self) -> int:
        return self.states.size - 1


def simulate_trajectory(params: ModelParams, k0: float, horizon: float, rng_stream: RngStream,
                        resume_from: TrajectoryState | None = None) -> JumpTrajectory:
    """Exact path of K on [0, horizon] and Z(horizon).

    With resume_from, the path continues from a previous call's final state
    (same stream); only the jumps after the checkpoint are returned.
    """
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    coef, u0, du, pw = _table_args(params)
    key = rng_stream.key
    if resume_from is None:
        _check_k(k0)
        k = float(_clamp(float(k0)))
        sk = math.sin(math.pi * k)
        ctr = np.uint64(rng_stream.counter)
        tau, ctr = _holding(sk, params.gamma0, key, ctr)
        st = (k, sk, 0.0, 0.0, 0.0, tau, ctr, 0)
        t_start = 0.0
    else:
        r = resume_from
        if horizon < r.time:
            raise DomainError("cannot resume to a horizon before the checkpoint")
        st = (r.k, r.sin_k, r.t_last, r.z_sum, r.z_comp, r.t_next, np.uint64(r.counter), r.n_jumps)
        t_start = r.t_last
    # first pass counts the jumps, second pass records them
    probe = _advance(*st, key, horizon, params.gamma0, coef, u0, du, pw, np.empty(0), np.empty(0))
    n_new = probe[7] - st[7]
    rec_k = np.empty(probe[7])
    rec_t = np.empty(probe[7])
    fin = _advance(*st, key, horizon, params.gamma0, coef, u0, du, pw, rec_k, rec_t)
    k, sk, t_last, zs, zc, t_next, ctr, nj = fin
    z_end = float(_z_at(k, t_last, zs, zc, horizon, coef, u0, du, pw))
    rng_stream.counter = int(ctr)
    states = np.concatenate([[st[0]], rec_k[st[7]:]])
    times = np.concatenate([[t_start], rec_t[st[7]:]])
    assert states.size == n_new + 1
    state = TrajectoryState(k=float(k), sin_k=float(sk), t_last=float(t_last), z_sum=float(zs), z_comp=float(zc),
                            t_next=float(t_next), counter=int(ctr), n_jumps=int(nj), time=float(horizon))
    return JumpTrajectory(states=states, jump_times=times, z_end=z_end, horizon=float(horizon), state=state)


@dataclass(frozen=True)
class FlightSample:
    z: np.ndarray
    k_end: np.ndarray
    n_jumps: np.ndarray
    horizon: float
    seed: int


def simulate_flights(params: ModelParams, horizon: float, n: int, seed: int, k0=None,
                     index_offset: int = 0) -> FlightSample:
    """Z(horizon) and K(horizon) for n independent trajectories.

    Trajectory i uses the stream (seed, index_offset + i); k0=None draws K(0)
    from pi, otherwise k0 is a scalar or an array of length n.
    """
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    if k0 is None:
        k0s = np.full(int(n), np.nan)
    else:
        k0s = np.broadcast_to(np.asarray(k0, float), (int(n),)).copy()
        if np.any(k0s == 0.0):
            raise DegenerateState("k = 0 is absorbing for the scattering process")
    coef, u0, du, pw = _table_args(params)
    z, kend, nj = _run_batch(seed_to_uint(seed), np.uint64(index_offset), k0s, float(horizon),
                             params.gamma0, coef, u0, du, pw)
    return FlightSample(z=z, k_end=kend, n_jumps=nj, horizon=float(horizon), seed=int(seed))


def mean_jump_rate(params: ModelParams) -> float:
    """Long-run jumps per unit time, 2 gamma0 int R dk = 3 gamma0.

    K(t) is stationary under Lebesgue measure (symmetric kernel), so the
    average rate is the Lebesgue mean of 2 gamma0 R."""
    return 3.0 * params.gamma0


# --------------------------------------------------------------- tail law

def scaling_N(params: ModelParams, N: float, log_correction: bool = True) -> float:
    """Space-time ratio N(theta); log_correction=False drops (log N)^1/2 at theta = 3."""
    require_theta_above_two(params)
    th = params.theta
    if th < 3.0:
        return N ** ((7.0 - th) / 6.0)
    if th == 3.0 and log_correction:
        return math.sqrt(math.log(N)) * N ** (2.0 / 3.0)
    return N ** (2.0 / 3.0)


def psi(params: ModelParams, k):
    """omega'(k) / (2 gamma0 R(k)), the mean flight length from k."""
    from .scattering import R_mean

    return dispersion.omega_prime(params, k) / (2.0 * params.gamma0 * R_mean(k))


def _exceedance_intervals(params, level):
    """Sub-intervals of (0, 1/2) where psi > level (psi < 0 for k < 0)."""
    u_min = math.log(1e-14)
    while psi(params, math.exp(u_min)) <= level:
        u_min -= 10.0
        if u_min < -600:
            raise DomainError("exceedance level too large to resolve")
    u = np.linspace(u_min, math.log(0.5), 600)
    vals = psi(params, np.exp(u)) - level
    out = []
    start = 0.0
    inside = True
    for i in range(1, u.size):
        if (vals[i - 1] > 0) != (vals[i] > 0):
            root = optimize.brentq(lambda x: psi(params, math.exp(x)) - level, u[i - 1], u[i],
                                   xtol=1e-14, rtol=1e-15)
            if inside:
                out.append((start, math.exp(root)))
            else:
                start = math.exp(root)
            inside = not inside
    if inside:
        out.append((start, 0.5))
    return out


def tail_statistic(params: ModelParams, N: float, lam: float, strict: bool = False,
                   log_correction: bool = True) -> float:
    """N pi(psi(k) > N(theta) lam), exactly up to root-finding.

    Returns 0 when the exceedance set is empty; with strict=True that case
    raises NoExceedance instead.
    """
    require_theta_above_two(params)
    if not lam > 0:
        raise DomainError("lambda must be positive")
    level = scaling_N(params, N, log_correction) * lam
    ivals = _exceedance_intervals(params, level)
    if not ivals:
        if strict:
            raise NoExceedance(f"no k with psi(k) > {level}")
        return 0.0
    mass = sum(float(_R_antiderivative(b) - _R_antiderivative(a)) for a, b in ivals)
    return N * (2.0 / 3.0) * mass


def tail_limit(params: ModelParams, lam) -> float:
    """C_star gamma0^-alpha lam^-alpha."""
    a = params.alpha
    return resolvent.C_star(params) * params.gamma0 ** (-a) * np.asarray(lam, float) ** (-a)


def fit_tail_exponent(params: ModelParams, N: float, lams, log_correction: bool = True):
    """Least-squares slope and prefactor of log(statistic) against log(lambda)."""
    lams = np.asarray(lams, float)
    vals = np.array([tail_statistic(params, N, l, log_correction=log_correction) for l in lams])
    if np.any(vals <= 0):
        raise NoExceedance("empty exceedance set inside the lambda range")
    res = stats.linregress(np.log(lams), np.log(vals))
    return -res.slope, math.exp(res.intercept), vals


# -------------------------------------------------------- stable exponent

@dataclass(frozen=True)
class LevyEstimate:
    theta: float
    exponent_fit: float
    coefficient_fit: float
    stderr: float
    n_samples: int
    n_time: float
    coefficient_stderr: float = 0.0
    r_squared: float = 1.0
    xi_window: tuple = (0.0, 0.0)
    max_imag_z: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.exponent_fit <= 2.0:
            raise FitDegenerate(f"fitted stable index {self.exponent_fit} outside (0, 2]")
        if self.stderr < 0:
            raise ValueError("stderr must be non-negative")


def empirical_cf(x: np.ndarray, xi: np.ndarray):
    """Real and imaginary parts of mean(exp(i xi x)) and their standard errors."""
    x = np.asarray(x, float)
    xi = np.asarray(xi, float)
    re = np.empty(xi.size)
    im = np.empty(xi.size)
    re_se = np.empty(xi.size)
    im_se = np.empty(xi.size)
    n = x.size
    for j, w in enumerate(xi):
        c = np.cos(w * x)
        s = np.sin(w * x)
        re[j], im[j] = c.mean(), s.mean()
        re_se[j] = c.std(ddof=1) / math.sqrt(n)
        im_se[j] = s.std(ddof=1) / math.sqrt(n)
    return re, im, re_se, im_se


def _fit_window(x, lo=0.1, hi=2.0):
    scale = np.median(np.abs(x - np.median(x)))
    if not scale > 0:
        raise FitDegenerate("samples have no spread")
    xi = np.geomspace(1e-3 / scale, 1e2 / scale, 161)
    re, im, _, _ = empirical_cf(x, xi)
    amp = np.hypot(re, im)
    with np.errstate(divide="ignore"):
        ll = -np.log(amp)
    good = np.flatnonzero((ll >= lo) & (ll <= hi))
    if good.size < 2:
        raise FitDegenerate("characteristic function never enters the fit window")
    centre = math.sqrt(xi[good[0]] * xi[good[-1]])
    return centre / math.sqrt(10.0), centre * math.sqrt(10.0)


def fit_stable_law(x: np.ndarray, t: float = 1.0, n_points: int = 21, n_batches: int = 10,
                   window=None):
    """Fit -log|phi(xi)| = c t |xi|^a over one decade of the angular frequency xi.

    Returns (a, c, a_stderr, c_stderr, r_squared, window, max |Im phi| / stderr).
    Standard errors come from batch means over n_batches disjoint sub-samples.
    """
    x = np.asarray(x, float)
    if window is None:
        window = _fit_window(x)
    xi = np.geomspace(window[0], window[1], n_points)

    def fit(sub):
        re, im, _, _ = empirical_cf(sub, xi)
        amp = np.hypot(re, im)
        if np.any(amp <= 0) or np.any(amp >= 1):
            raise FitDegenerate("characteristic function left (0, 1) inside the window")
        y = np.log(-np.log(amp))
        r = stats.linregress(np.log(xi), y)
        return r.slope, math.exp(r.intercept) / t, r.rvalue**2

    a, c, r2 = fit(x)
    if r2 < 0.9:
        raise FitDegenerate(f"characteristic-function regression has R^2 = {r2:.3f} < 0.9")
    if n_batches >= 2 and x.size >= 10 * n_batches:
        parts = np.array_split(x, n_batches)
        aa, cc = [], []
        for p in parts:
            try:
                pa, pc, _ = fit(p)
            except FitDegenerate:
                continue
            aa.append(pa)
            cc.append(pc)
        if len(aa) >= 2:
            a_se = float(np.std(aa, ddof=1) / math.sqrt(len(aa)))
            c_se = float(np.std(cc, ddof=1) / math.sqrt(len(cc)))
        else:
            a_se = c_se = float("nan")
    else:
        a_se = c_se = float("nan")
    _, im, _, im_se = empirical_cf(x, xi)
    max_imag_z = float(np.max(np.abs(im) / im_se))
    return a, c, a_se, c_se, r2, tuple(window), max_imag_z


def estimate_stable_exponent(params: ModelParams, N: float, t: float, n_samples: int,
                             rng_seed: int, log_correction: bool = True) -> LevyEstimate:
    """Simulate Z(N t) / N(theta) with K(0) ~ pi and fit its stable law."""
    require_theta_above_two(params)
    if n_samples < 10_000:
        raise InsufficientReplicas("n_samples must be at least 10^4")
    x = scaled_flights(params, N, t, n_samples, rng_seed, log_correction)
    a, c, a_se, c_se, r2, win, imz = fit_stable_law(x, t)
    return LevyEstimate(theta=params.theta, exponent_fit=float(a), coefficient_fit=float(c),
                        stderr=a_se, n_samples=int(n_samples), n_time=float(N),
                        coefficient_stderr=c_se, r_squared=float(r2), xi_window=win,
                        max_imag_z=imz)


def scaled_flights(params: ModelParams, N: float, t: float, n_samples: int, rng_seed: int,
                   log_correction: bool = True) -> np.ndarray:
    fl = simulate_flights(params, N * t, n_samples, rng_seed)
    return fl.z / scaling_N(params, N, log_correction)


# ------------------------------------------------------- Boltzmann solver

def bump_function(lam: float, y_star: float, r: float, y):
    """exp(-lam / (r^2 - |y - y*|^2)) on the open ball B(y*, r), 0 outside."""
    if not r > 0:
        raise DomainError("r must be positive")
    y = np.asarray(y, float)
    d2 = (y - y_star) ** 2
    inside = d2 < r * r
    gap = np.where(inside, r * r - d2, 1.0)
    out = np.where(inside, np.exp(-lam / gap), 0.0)
    return out if out.ndim else float(out)


def homogenized_kappa(params: ModelParams) -> float:
    """Multiplier kappa in exp(-kappa |p|^alpha t) (ordinary frequency p) of E u0(y + X_t)."""
    return _TWO_PI ** params.alpha * resolvent.C_big(params)


def _shifted_mean(v, axis=-1):
    """Mean and standard error, computed about the first sample.

    A constant input returns that constant exactly with zero error."""
    v = np.moveaxis(np.asarray(v, float), axis, -1)
    ref = v[..., :1]
    d = v - ref
    n = v.shape[-1]
    mean = ref[..., 0] + d.mean(axis=-1)
    if n > 1:
        se = d.std(axis=-1, ddof=1) / math.sqrt(n)
    else:
        se = np.zeros_like(mean)
    return mean, se


@dataclass(frozen=True)
class BoltzmannField:
    y: np.ndarray
    k: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    t: float
    n_samples: int


def solve_boltzmann_mc(params: ModelParams, u0, t: float, y_grid, k_grid, n_samples: int,
                       rng_seed: int) -> BoltzmannField:
    """u(y, k, t) = E_k[u0(y + Z(t), K(t))] on the (y, k) grid.

    u0(y, k) must accept broadcast arrays. Trajectories started at k_grid[j]
    use streams (rng_seed, j * n_samples + i); all y nodes share them.
    """
    y = np.atleast_1d(np.asarray(y_grid, float))
    ks = np.atleast_1d(np.asarray(k_grid, float))
    if t < 0:
        raise DomainError("t must be non-negative")
    vals = np.empty((y.size, ks.size))
    errs = np.empty((y.size, ks.size))
    for j, k in enumerate(ks):
        if t == 0:
            z = np.zeros(n_samples)
            kend = np.full(n_samples, k)
        else:
            fl = simulate_flights(params, t, n_samples, rng_seed, k0=k, index_offset=j * n_samples)
            z, kend = fl.z, fl.k_end
        samples = u0(y[:, None] + z[None, :], kend[None, :])
        vals[:, j], errs[:, j] = _shifted_mean(np.broadcast_to(samples, (y.size, z.size)))
    return BoltzmannField(y=y, k=ks, values=vals, stderr=errs, t=float(t), n_samples=int(n_samples))


@dataclass(frozen=True)
class HomogenizationResult:
    y: np.ndarray
    k: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    k_average: np.ndarray
    deficit: np.ndarray
    deficit_debiased: np.ndarray
    N: float


def rescaled_uN(params: ModelParams, u0, N: float, t: float, y, k_grid, n_samples: int,
                rng_seed: int, log_correction: bool = True) -> HomogenizationResult:
    """u_N(N(theta) y, k, t) = E_k[u0(y + Z(N t) / N(theta), K(N t))].

    k_grid should be a uniform grid of the torus so that plain means are
    k-integrals. The deficit is the k-mean of |u_N - k-average|^2;
    deficit_debiased subtracts the Monte-Carlo variance contribution.
    """
    nt = scaling_N(params, N, log_correction)
    y = np.atleast_1d(np.asarray(y, float))
    ks = np.atleast_1d(np.asarray(k_grid, float))
    vals = np.empty((y.size, ks.size))
    errs = np.empty((y.size, ks.size))
    for j, k in enumerate(ks):
        fl = simulate_flights(params, N * t, n_samples, rng_seed, k0=k, index_offset=j * n_samples)
        samples = u0(y[:, None] + fl.z[None, :] / nt, fl.k_end[None, :])
        vals[:, j], errs[:, j] = _shifted_mean(np.broadcast_to(samples, (y.size, n_samples)))
    avg = vals.mean(axis=1)
    deficit = ((vals - avg[:, None]) ** 2).mean(axis=1)
    m = ks.size
    noise = (errs**2).mean(axis=1) * (m - 1) / m
    return HomogenizationResult(y=y, k=ks, values=vals, stderr=errs, k_average=avg,
                                deficit=deficit, deficit_debiased=deficit - noise, N=float(N))
