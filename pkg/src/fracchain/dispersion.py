"""Dispersion data of the long-range chain.

The lattice sums are evaluated through the Mellin representation
x^-nu = Gamma(nu)^-1 int_0^inf t^(nu-1) exp(-x t) dt, which turns every sum
over x >= 1 into a rational function of z = exp(-t).  In the variable
u = log t the integrands are analytic in the strip |Im u| < pi/2 and decay
exponentially at both ends, so the trapezoid rule converges like
exp(-pi^2 / h).  The integrands are single-signed, so the evaluation keeps
full relative precision all the way down to k ~ 1e-12, where a direct sum
would need ~1/k terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .params import (
    DomainError,
    ModelParams,
    NonConvergence,
    reduce_k,
    require_theta_above_two,
)

_CHUNK = 1 << 22
_H_START = 0.25
_LOWER_SPAN = 38.0
# smallest nonzero |k|: below it products in the quadrature kernel underflow
K_MIN = 1e-100


def _t_max(nu: float) -> float:
    return 80.0 + 3.0 * nu


def _log_trapezoid(nu, kernel, scale, q, params: ModelParams):
    """int_0^inf t^(nu-1) kernel(t) dt for every row, divided by Gamma(nu).

    kernel(t, rows) evaluates the rows' integrands on a (rows x nodes) mesh.
    scale is the smallest t-scale of each row; q is the power with which
    kernel(t) behaves as t -> 0, used for the analytic lower tail.
    """
    n_rows = scale.size
    u_lo = max(math.log(float(scale.min())) - _LOWER_SPAN, -700.0)
    u_hi = math.log(_t_max(nu))
    h = _H_START
    while True:
        n_nodes = int(math.ceil((u_hi - u_lo) / h)) + 1
        if n_nodes > params.series_max_terms:
            raise NonConvergence(
                f"lattice sum needs {n_nodes} nodes (> series_max_terms)"
            )
        u = u_lo + h * np.arange(n_nodes)
        t = np.exp(u)
        w = np.exp(nu * u)
        fine = np.empty(n_rows)
        coarse = np.empty(n_rows)
        mag = np.empty(n_rows)
        step = max(1, _CHUNK // n_nodes)
        for i in range(0, n_rows, step):
            rows = slice(i, min(i + step, n_rows))
            f = kernel(t[None, :], rows) * w
            fine[rows] = h * f.sum(axis=1)
            coarse[rows] = 2.0 * h * f[:, ::2].sum(axis=1)
            mag[rows] = h * np.abs(f).sum(axis=1)
        diff = np.abs(fine - coarse)
        thresh = params.series_tol * np.minimum(1.0, np.abs(fine)) + 64 * np.finfo(float).eps * mag
        if np.all(diff <= thresh):
            break
        h *= 0.5
    t_lo = math.exp(u_lo)
    tail = kernel(np.array([[t_lo]]), slice(None))[:, 0] * t_lo**nu / (nu + q)
    return (fine + tail) / special.gamma(nu)


def _sum_sin_sin(theta, sm2, sp2, prod, params):
    """sum_{x>=1} sin(a x) sin(b x) x^-theta.

    Inputs are sin^2((a-b)/2), sin^2((a+b)/2) and sin(a) sin(b); passing the
    half-angle sines directly avoids cancellation when a and b are close.
    """
    out = np.zeros(prod.shape)
    live = prod != 0.0
    if not np.any(live):
        return out
    sm2, sp2, pr = sm2[live], sp2[live], prod[live]
    # b = -a is the diagonal case with the half-angle roles exchanged
    flip = (sp2 == 0.0) & (sm2 != 0.0)
    sm2, sp2 = np.where(flip, sp2, sm2), np.where(flip, sm2, sp2)
    same = sm2 == 0.0
    cand = np.where(same, sp2, np.minimum(sm2, sp2))
    scale = 2.0 * np.sqrt(cand)

    def kernel(t, rows):
        z = np.exp(-t)
        omz = -np.expm1(-t)
        a2 = sm2[rows][:, None]
        b2 = sp2[rows][:, None]
        p = pr[rows][:, None]
        s = same[rows][:, None]
        dm = omz * omz + 4.0 * z * a2
        dp = omz * omz + 4.0 * z * b2
        general = p * z * (-np.expm1(-2.0 * t)) / dm / dp
        # a = b: the common factor (1 - z) is cancelled analytically
        diag = p * z * (1.0 + z) / (omz * dp)
        return np.where(s, diag, general)

    # small-t behaviour: t^-1 when a = b, t^+1 otherwise
    q = np.where(same, -1.0, 1.0)
    val = _log_trapezoid_rows(theta, kernel, scale, q, params)
    out[live] = val
    return out


def _log_trapezoid_rows(nu, kernel, scale, q, params):
    # the lower-tail exponent differs per row, so apply it row-wise
    if np.all(q == q.flat[0]):
        return _log_trapezoid(nu, kernel, scale, float(q.flat[0]), params)
    out = np.empty(scale.size)
    for qq in np.unique(q):
        sel = np.flatnonzero(q == qq)

        def sub(t, rows, sel=sel):
            idx = sel[rows]
            return kernel(t, idx)

        out[sel] = _log_trapezoid(nu, sub, scale[sel], float(qq), params)
    return out


def _sum_sin(nu, half2, sin_a, params):
    """sum_{x>=1} sin(a x) x^-nu given sin^2(a/2) and sin(a)."""
    out = np.zeros(sin_a.shape)
    live = sin_a != 0.0
    if not np.any(live):
        return out
    h2, sa = half2[live], sin_a[live]
    scale = 2.0 * np.sqrt(h2)

    def kernel(t, rows):
        z = np.exp(-t)
        omz = -np.expm1(-t)
        return sa[rows][:, None] * z / (omz * omz + 4.0 * z * h2[rows][:, None])

    out[live] = _log_trapezoid(nu, kernel, scale, 0.0, params)
    return out


def _as_array(k):
    arr = np.asarray(reduce_k(k), dtype=float)
    a = np.abs(arr)
    if np.any((a > 0.0) & (a < K_MIN)):
        raise DomainError(f"nonzero |k| below {K_MIN:g} is outside the resolvable range")
    return np.atleast_1d(arr), arr.ndim == 0


def _ret(val, scalar):
    return float(val[0]) if scalar else val


def a_hat(params: ModelParams, k):
    """Fourier symbol a_hat(k) = 4 sum_{x>=1} sin^2(pi k x) / x^theta."""
    kk, scalar = _as_array(k)
    s = np.sin(np.pi * kk)
    s2 = s * s
    val = 4.0 * _sum_sin_sin(params.theta, np.zeros_like(s2), s2, s2, params)
    return _ret(val, scalar)


def a_hat_prime(params: ModelParams, k):
    """Derivative 4 pi sum_{x>=1} sin(2 pi k x) / x^(theta-1); needs theta > 2."""
    require_theta_above_two(params)
    kk, scalar = _as_array(k)
    s = np.sin(np.pi * kk)
    val = 4.0 * np.pi * _sum_sin(params.theta - 1.0, s * s, np.sin(2.0 * np.pi * kk), params)
    return _ret(val, scalar)


def a_hat_difference(params: ModelParams, k, h):
    """a_hat(k + h/2) - a_hat(k - h/2), computed without cancellation."""
    kk = np.asarray(k, dtype=float)
    hh = np.asarray(h, dtype=float)
    kk, hh = np.broadcast_arrays(kk, hh)
    scalar = kk.ndim == 0
    kk = np.atleast_1d(kk).astype(float).ravel()
    hh = np.atleast_1d(hh).astype(float).ravel()
    sm = np.sin(np.pi * (kk - 0.5 * hh))
    sp = np.sin(np.pi * (kk + 0.5 * hh))
    prod = np.sin(2.0 * np.pi * kk) * np.sin(np.pi * hh)
    val = 4.0 * _sum_sin_sin(params.theta, sm * sm, sp * sp, prod, params)
    if scalar:
        return float(val[0])
    return val.reshape(np.broadcast(np.asarray(k), np.asarray(h)).shape)


def omega(params: ModelParams, k):
    return np.sqrt(a_hat(params, k))


@dataclass(frozen=True)
class DispersionSample:
    k: np.ndarray | float
    a_hat: np.ndarray | float
    a_hat_prime: np.ndarray | float
    omega: np.ndarray | float
    omega_prime: np.ndarray | float


def omega_and_prime(params: ModelParams, k) -> DispersionSample:
    """omega = sqrt(a_hat) and its derivative a_hat' / (2 omega)."""
    require_theta_above_two(params)
    kk = reduce_k(k)
    if np.any(np.asarray(kk) == 0.0):
        raise DomainError("omega' is undefined at k = 0")
    a = a_hat(params, kk)
    ap = a_hat_prime(params, kk)
    w = np.sqrt(a)
    return DispersionSample(k=kk, a_hat=a, a_hat_prime=ap, omega=w, omega_prime=ap / (2.0 * w))


def omega_prime(params: ModelParams, k):
    return omega_and_prime(params, k).omega_prime


def C_theta(params: ModelParams) -> float:
    """Small-k constant C(theta) of a_hat.

    2 < theta < 3: 4 pi^(theta-1) int_0^inf sin^2 y / y^theta dy, by quadrature
    with the singular factor y^(2-theta) handled by an algebraic weight and the
    oscillatory tail split into its mean and a Fourier integral.
    theta = 3: 4 pi^2.  theta > 3: 4 pi^2 zeta(theta - 2).
    """
    require_theta_above_two(params)
    th = params.theta
    if th == 3.0:
        return 4.0 * math.pi**2
    if th > 3.0:
        return 4.0 * math.pi**2 * float(special.zeta(th - 2.0))
    return 4.0 * math.pi ** (th - 1.0) * sin2_power_integral(th)


def sin2_power_integral(theta: float) -> float:
    """int_0^inf sin^2(y) y^-theta dy for 1 < theta < 3."""
    y0 = math.pi

    def sinc2(y):
        return (math.sin(y) / y) ** 2 if y != 0.0 else 1.0

    head, _ = integrate.quad(sinc2, 0.0, y0, weight="alg", wvar=(2.0 - theta, 0.0),
                             epsabs=0.0, epsrel=1e-13, limit=200)
    osc, _ = integrate.quad(lambda y: y**-theta, y0, np.inf, weight="cos", wvar=2.0,
                            epsabs=1e-13, limlst=100)
    tail = 0.5 * y0 ** (1.0 - theta) / (theta - 1.0) - 0.5 * osc
    return head + tail


def C_theta_closed_form(theta: float) -> float:
    """Gamma-function form of C(theta) for 2 < theta < 3 (used as a cross-check)."""
    val = 2.0 ** (theta - 2.0) / (theta - 1.0) * math.cos((theta - 1.0) * math.pi / 2.0) * special.gamma(2.0 - theta)
    return 4.0 * math.pi ** (theta - 1.0) * val


def delta_eps_omega(params: ModelParams, eps: float, p, k):
    """(omega(k + eps p / 2) - omega(k - eps p / 2)) / eps."""
    require_theta_above_two(params)
    if not 0.0 < eps < 1.0:
        raise DomainError("eps must lie in (0, 1)")
    p_arr, k_arr = np.broadcast_arrays(np.asarray(p, float), np.asarray(k, float))
    scalar = p_arr.ndim == 0
    pp = np.atleast_1d(p_arr).ravel()
    kk = np.atleast_1d(k_arr).ravel()
    hh = eps * pp
    diff = a_hat_difference(params, kk, hh)
    wp = np.sqrt(a_hat(params, kk + 0.5 * hh))
    wm = np.sqrt(a_hat(params, kk - 0.5 * hh))
    den = eps * (wp + wm)
    val = np.divide(diff, den, out=np.zeros_like(diff), where=den > 0)
    return float(val[0]) if scalar else val.reshape(p_arr.shape)


def time_scaling(params: ModelParams, eps: float) -> float:
    """Space-time scaling ratio f_{theta,s}(eps)."""
    if not 0.0 < eps < 1.0:
        raise DomainError("eps must lie in (0, 1)")
    th, s = params.theta, params.s
    if th < 3.0:
        return eps ** ((6.0 - s * (th - 1.0)) / (7.0 - th))
    if th == 3.0:
        if s == 1.0:
            return eps
        return eps**s * h_inverse(eps, s) ** 3
    return eps ** ((3.0 - s) / 2.0)


def _h_forward(y: float, s: float) -> float:
    return (y**4 / -math.log(y)) ** (1.0 / (2.0 * (1.0 - s)))


def h_inverse(eps: float, s: float) -> float:
    """Root y in (0, 1) of (y^4 / (-log y))^(1 / (2(1-s))) = eps, by bisection."""
    if not 0.0 <= s < 1.0:
        raise DomainError("h_s is defined for 0 <= s < 1")
    lo, hi = 1e-300, 1.0 - 1e-9
    # work with the logarithm of the map; it is increasing on the bracket
    target = math.log(eps)

    def g(y):
        return (4.0 * math.log(y) - math.log(-math.log(y))) / (2.0 * (1.0 - s))

    if not g(lo) < target < g(hi):
        raise DomainError(f"eps={eps} is outside the range of the scaling map")
    if not g(lo) < g(math.sqrt(lo * hi)) < g(hi):
        raise NonConvergence("scaling map is not monotone on the bracket")
    for _ in range(400):
        mid = math.sqrt(lo * hi) if hi / lo > 4.0 else 0.5 * (lo + hi)
        if g(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * hi:
            break
    return 0.5 * (lo + hi)


def k_eps_factor(params: ModelParams, eps: float, p: float) -> float:
    """Factor c with k_eps = c k used in the small-k rescaling of the resolvent."""
    th = min(params.theta, 3.0)
    f = time_scaling(params, eps)
    e = 2.0 / (7.0 - th)
    return params.gamma0 ** (-e) * abs(p) ** e * (f / eps**params.s) ** (1.0 / 3.0)


def rescaled_delta_eps_omega(params: ModelParams, eps: float, p: float, k):
    """Rescaled difference quotient evaluated at k_eps; tends to the small-k law."""
    require_theta_above_two(params)
    th = params.theta
    f = time_scaling(params, eps)
    ke = k_eps_factor(params, eps, p) * np.asarray(k, float)
    d = delta_eps_omega(params, eps, p, ke)
    if th < 3.0:
        norm = (params.gamma0 ** (-(3.0 - th) / (7.0 - th)) * abs(p) ** (-4.0 / (7.0 - th))
                * (f / eps**params.s) ** ((3.0 - th) / 6.0))
    elif th == 3.0:
        norm = 1.0 / (abs(p) * math.sqrt(-math.log((f / eps**params.s) ** (1.0 / 3.0))))
    else:
        norm = 1.0 / abs(p)
    return norm * d


def rescaled_limit(params: ModelParams, p: float, k):
    require_theta_above_two(params)
    k = np.asarray(k, float)
    sg = np.sign(p) * np.sign(k)
    c = math.sqrt(C_theta(params))
    if params.theta < 3.0:
        return sg * (params.theta - 1.0) * c / 2.0 * np.abs(k) ** (-(3.0 - params.theta) / 2.0)
    return sg * c


def F_two_point(params: ModelParams, k, kp):
    """F(k,k') = (a(k+k') - a(k) - a(k')) / (omega(k) omega(k'))."""
    require_theta_above_two(params)
    k, kp = np.broadcast_arrays(np.asarray(reduce_k(k), float), np.asarray(reduce_k(kp), float))
    if np.any(k == 0.0) or np.any(kp == 0.0):
        raise DomainError("F is undefined when k or k' is zero")
    a_sum = a_hat(params, reduce_k(k + kp))
    a1 = a_hat(params, k)
    a2 = a_hat(params, kp)
    val = (a_sum - a1 - a2) / np.sqrt(a1 * a2)
    return float(val) if np.ndim(val) == 0 else val


def F1_two_point(params: ModelParams, k, kp):
    return F_two_point(params, k, kp) + 2.0


def leading_term(params: ModelParams, k):
    """Small-k leading behaviour of a_hat for the three regimes."""
    k = np.abs(np.asarray(k, float))
    th = params.theta
    if th < 3.0:
        return C_theta(params) * k ** (th - 1.0)
    if th == 3.0:
        return 4.0 * math.pi**2 * k**2 * np.abs(np.log(k))
    return C_theta(params) * k**2
