"""Resolvent integrals and the closed-form diffusion constants.

D(k) = f lam + 2 gamma R(k) + i eps (delta_eps omega)(p, k), gamma = eps^s gamma0,
a_eps = int (2 gamma R / f) (1 - 2 gamma R / D) dk and
I_eps = int 2 gamma R eps^2 (delta_eps omega)^2 / (f |D|^2) dk.
As eps -> 0, a_eps -> lam + C_big |p|^alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from . import dispersion
from .params import (
    DomainError,
    ModelParams,
    QuadratureFailure,
    reduce_k,
    UnsupportedTheta,
    require_theta_above_two,
    stable_index,
)
from .scattering import R_mean


@dataclass(frozen=True)
class ResolventPoint:
    eps: float
    p: float
    lam: float
    value: complex

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError("lambda must be positive")
        if not 0.0 < self.eps < 1.0:
            raise DomainError("eps must lie in (0, 1)")


# ---------------------------------------------------------------- constants

def _c_big_low(theta, gamma0, C):
    a = 6.0 / (7.0 - theta)
    return (24.0 * math.pi**3 / math.sin((4.0 - theta) * math.pi / (7.0 - theta)) / (7.0 - theta)
            * ((theta - 1.0) / (24.0 * math.pi**2)) ** a
            * gamma0 ** (-(theta - 1.0) / (7.0 - theta)) * C ** (3.0 / (7.0 - theta)))


def _c_big_high(theta, gamma0, C):
    return math.sqrt(6.0) / 12.0 * gamma0**-0.5 * C**0.75


def C_big_branches(theta: float, gamma0: float, C: float) -> tuple[float, float]:
    """Both branch expressions of C_{theta,gamma0} at a given C(theta)."""
    return _c_big_low(theta, gamma0, C), _c_big_high(theta, gamma0, C)


def C_big(params: ModelParams) -> float:
    """Diffusion coefficient C_{theta,gamma0} of the limiting fractional equation."""
    require_theta_above_two(params)
    C = dispersion.C_theta(params)
    if params.theta <= 3.0:
        return _c_big_low(params.theta, params.gamma0, C)
    return _c_big_high(params.theta, params.gamma0, C)


def c_small(params: ModelParams) -> float:
    """Coefficient obtained from the Levy measure of the flight process.

    The (1 - cos) integral is computed by direct quadrature, independently of
    the Gamma-function identity behind C_big.
    """
    require_theta_above_two(params)
    th, g0 = params.theta, params.gamma0
    C = dispersion.C_theta(params)
    a = stable_index(th)
    J = one_minus_cos_integral(a)
    if th <= 3.0:
        pref = (24.0 * math.pi**2 / (7.0 - th) * g0 ** (-(th - 1.0) / (7.0 - th))
                * ((th - 1.0) * math.sqrt(C) / (24.0 * math.pi**2)) ** a)
    else:
        pref = math.sqrt(3.0) / (12.0 * math.pi) * g0**-0.5 * C**0.75
    return pref * special.gamma(a + 1.0) * J


def C_star(params: ModelParams) -> float:
    """Tail constant: N pi(psi > N(theta) lam) -> C_star gamma0^-alpha lam^-alpha."""
    require_theta_above_two(params)
    th = params.theta
    C = dispersion.C_theta(params)
    if th <= 3.0:
        return 4.0 * math.pi**2 / 3.0 * ((th - 1.0) * math.sqrt(C) / (24.0 * math.pi**2)) ** (6.0 / (7.0 - th))
    return 4.0 * math.pi**2 / 3.0 * (math.sqrt(C) / (12.0 * math.pi**2)) ** 1.5


def csc_identity_residual(theta: float) -> float:
    """|csc((4-theta) pi/(7-theta)) - csc(3 pi (3-theta)/(4(7-theta)) + pi/4)|."""
    a = 1.0 / math.sin((4.0 - theta) * math.pi / (7.0 - theta))
    b = 1.0 / math.sin(3.0 * math.pi * (3.0 - theta) / (4.0 * (7.0 - theta)) + math.pi / 4.0)
    return abs(a - b)


# ----------------------------------------------------- special integrals

def residue_integral(tau: float) -> float:
    """int_R k^2 / (k^4 + 1) |k|^-tau dk = pi csc(pi tau / 4 + pi / 4) / 2."""
    if not 0.0 <= tau < 1.0:
        raise DomainError("tau must lie in [0, 1)")
    return math.pi / math.sin(math.pi * tau / 4.0 + math.pi / 4.0) / 2.0


def residue_integral_quadrature(tau: float) -> float:
    """Same integral by quadrature; k -> 1/k maps (1, inf) onto (0, 1)."""
    if not 0.0 <= tau < 1.0:
        raise DomainError("tau must lie in [0, 1)")

    def g(x):
        return 1.0 / (1.0 + x**4)

    inner, _ = integrate.quad(g, 0.0, 1.0, weight="alg", wvar=(2.0 - tau, 0.0), epsabs=0.0, epsrel=1e-13)
    outer, _ = integrate.quad(g, 0.0, 1.0, weight="alg", wvar=(tau, 0.0), epsabs=0.0, epsrel=1e-13)
    return 2.0 * (inner + outer)


def sine_integral(a: float) -> float:
    """int_0^inf sin(y) y^-a dy = cos(a pi / 2) Gamma(1 - a) for 1 < a < 2."""
    if not 1.0 < a < 2.0:
        raise DomainError("a must lie in (1, 2)")
    return math.cos(a * math.pi / 2.0) * special.gamma(1.0 - a)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)


def _gl_segments(f, edges):
    """Gauss-Legendre integral of f over each [edges[i], edges[i+1]]."""
    lo, hi = edges[:-1, None], edges[1:, None]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    y = mid + half * _GL_X[None, :]
    return (f(y) * _GL_W[None, :]).sum(axis=1) * half[:, 0]


def _repeated_average(partial):
    s = np.asarray(partial, float)
    while s.size > 1:
        s = 0.5 * (s[1:] + s[:-1])
    return float(s[0])


def sine_integral_quadrature(a: float, n_terms: int = 60) -> float:
    """Between-zeros summation with repeated averaging of the alternating tail."""
    if not 1.0 < a < 2.0:
        raise DomainError("a must lie in (1, 2)")
    head, _ = integrate.quad(lambda y: math.sin(y) / y if y else 1.0, 0.0, math.pi,
                             weight="alg", wvar=(1.0 - a, 0.0), epsabs=0.0, epsrel=1e-13)
    edges = math.pi * np.arange(1, n_terms + 2, dtype=float)
    terms = _gl_segments(lambda y: np.sin(y) * y**-a, edges)
    partial = head + np.cumsum(terms)
    return _repeated_average(partial[n_terms // 2:])


def _cos_tail(b: float, Y: float, n: int = 6) -> float:
    """int_Y^inf cos(y) y^-b dy for Y a multiple of 2 pi, by its asymptotic series."""
    total, coef, power = 0.0, b, b + 1.0
    for j in range(n):
        total += (-1) ** j * coef * Y**-power
        coef *= (power) * (power + 1.0)
        power += 2.0
    return total


def one_minus_cos_integral(a: float, periods: int = 1592) -> float:
    """int_R (1 - cos y) |y|^(-a-1) dy for 0 < a < 2 by direct quadrature.

    [0, 2 pi] carries the y^(1-a) singular factor as an algebraic weight;
    whole periods up to Y ~ 1e4 are summed with Gauss-Legendre, and the
    remainder splits into the exact power tail and an asymptotic cosine tail.
    """
    if not 0.0 < a < 2.0:
        raise DomainError("a must lie in (0, 2)")

    def g(y):
        return (1.0 - math.cos(y)) / y**2 if y > 1e-4 else 0.5 - y * y / 24.0

    head, _ = integrate.quad(g, 0.0, 2.0 * math.pi, weight="alg", wvar=(1.0 - a, 0.0),
                             epsabs=0.0, epsrel=1e-13, limit=200)
    edges = 2.0 * math.pi * np.arange(1, periods + 1, dtype=float)
    body = math.fsum(_gl_segments(lambda y: (1.0 - np.cos(y)) * y ** (-a - 1.0), edges))
    Y = edges[-1]
    tail = Y**-a / a - _cos_tail(a + 1.0, Y)
    return 2.0 * math.fsum([head, body, tail])


# ------------------------------------------------------ resolvent integrals

_PANELS_PER_DECADE = 8


def _panel_nodes(k_lo: float, order: int, per_decade: int, kinks=()):
    """Nodes/weights on (0, 1/2].

    One linear panel covers [0, k_lo]; above it panels are log-spaced, with
    extra geometric grading towards each kink (points where k -+ eps p / 2
    crosses 0 and omega is not smooth).
    """
    x, w = np.polynomial.legendre.leggauss(order)
    n_pan = max(1, int(math.ceil(math.log10(0.5 / k_lo) * per_decade)))
    edges = [np.exp(np.linspace(math.log(k_lo), math.log(0.5), n_pan + 1))]
    for b in kinks:
        if not k_lo < b < 0.5:
            continue
        steps = 10.0 ** (-np.arange(1, 14 * per_decade + 1) / per_decade)
        for side in (b * (1.0 - steps), b + min(b, 0.5 - b) * steps):
            edges.append(side[(side > k_lo) & (side < 0.5)])
        edges.append(np.array([b]))
    e = np.unique(np.concatenate(edges))
    lo, hi = e[:-1, None], e[1:, None]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    k = (mid + half * x[None, :]).ravel()
    wk = (half * w[None, :]).ravel()
    k0 = 0.5 * k_lo * (x + 1.0)
    w0 = 0.5 * k_lo * w
    return np.concatenate([k0, k]), np.concatenate([w0, wk])


def _scales(params: ModelParams, eps: float, p: float, lam: float):
    f = dispersion.time_scaling(params, eps)
    gamma = eps**params.s * params.gamma0
    s1 = math.sqrt(f * lam / (12.0 * math.pi**2 * gamma))
    s2 = dispersion.k_eps_factor(params, eps, p) if p != 0 else s1
    return f, gamma, min(s1, s2, 1e-2)


def _integrands(params, eps, p, lam, k):
    """Integrand arrays on +k and -k nodes."""
    f = dispersion.time_scaling(params, eps)
    gamma = eps**params.s * params.gamma0
    kk = np.concatenate([k, -k])
    two_gr = 2.0 * gamma * R_mean(kk)
    if p == 0.0:
        dw = np.zeros_like(kk)
    else:
        dw = dispersion.delta_eps_omega(params, eps, p, kk)
    D = f * lam + two_gr + 1j * eps * dw
    a_int = (two_gr / f) * (f * lam + 1j * eps * dw) / D
    absD2 = (f * lam + two_gr) ** 2 + (eps * dw) ** 2
    lam_int = two_gr * (f * lam + two_gr) / absD2
    I_int = two_gr * (eps * dw) ** 2 / (f * absD2)
    return a_int, lam_int, I_int, two_gr, D


def resolvent_quantities(params: ModelParams, eps: float, p: float, lam: float,
                         order: int = 16, rtol: float = 1e-9) -> dict:
    """a_eps, its lambda part, I_eps and the parity residue in one pass.

    Two Gauss-Legendre orders on the same panels are compared; a mismatch
    beyond rtol raises QuadratureFailure.
    """
    require_theta_above_two(params)
    if params.s >= 1.0:
        raise DomainError("resolvent integrals need 0 <= s < 1")
    if not lam > 0:
        raise DomainError("lambda must be positive")
    _, _, k_scale = _scales(params, eps, p, lam)
    k_lo = k_scale * 1e-4
    out = {}
    kinks = (abs(reduce_k(0.5 * eps * p)),) if p != 0 else ()
    for o in (order, order + 8):
        k, w = _panel_nodes(k_lo, o, _PANELS_PER_DECADE, kinks)
        a_int, lam_int, I_int, _, _ = _integrands(params, eps, p, lam, k)
        ww = np.concatenate([w, w])
        out[o] = (np.sum(ww * a_int), np.sum(ww * lam_int), np.sum(ww * I_int))
    (a1, l1, i1), (a2, l2, i2) = out[order], out[order + 8]
    if abs(a1.real - a2.real) > rtol * max(1.0, abs(a2.real)) or abs(i1 - i2) > rtol * max(1.0, abs(i2)):
        raise QuadratureFailure(f"resolvent quadrature not converged at eps={eps}, p={p}")
    return {"a_eps": float(a2.real), "a_eps_imag": float(a2.imag), "lambda_part": float(l2),
            "I_eps": float(i2), "f": dispersion.time_scaling(params, eps)}


def a_eps(params: ModelParams, eps: float, p: float, lam: float) -> float:
    q = resolvent_quantities(params, eps, p, lam)
    if abs(q["a_eps_imag"]) > 1e-10 * max(1.0, abs(q["a_eps"])):
        raise QuadratureFailure("imaginary part of a_eps does not cancel")
    return q["a_eps"]


def I_eps(params: ModelParams, eps: float, p: float, lam: float) -> float:
    return resolvent_quantities(params, eps, p, lam)["I_eps"]


def D_eps(params: ModelParams, eps: float, p: float, k, lam: float):
    f = dispersion.time_scaling(params, eps)
    gamma = eps**params.s * params.gamma0
    k = np.asarray(k, float)
    dw = dispersion.delta_eps_omega(params, eps, p, k) if p != 0 else np.zeros_like(k)
    return f * lam + 2.0 * gamma * R_mean(k) + 1j * eps * dw


def limit_value(params: ModelParams, p: float, lam: float) -> float:
    """lam + C_big |p|^alpha."""
    return lam + C_big(params) * abs(p) ** stable_index(params.theta)


def theta_branch_name(theta: float) -> str:
    if theta <= 2.0:
        raise UnsupportedTheta("theta > 2 is required")
    return "low" if theta <= 3.0 else "high"
