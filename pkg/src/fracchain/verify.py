"""Deterministic identity checks shared by the CLI verification command."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import chain_sim, dispersion, frac_pde, kinetic_mc, resolvent, scattering
from .params import ModelParams


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)


def kernel_decomposition(n_pairs: int = 10_000, seed: int = 0):
    rng = np.random.default_rng(seed)
    k, kp, p = rng.uniform(-0.5, 0.5, (3, n_pairs))
    d1 = np.max(np.abs(scattering.R_pair(k, kp) - scattering.R_pair_decomposed(k, kp)))
    d2 = np.max(np.abs(scattering.R_p_kernel(k, kp, p) - scattering.R_p_kernel_product(k, kp, p)))
    return [CheckResult("kernel rank-two decomposition", float(d1), 1e-12),
            CheckResult("kernel product vs sum form", float(d2), 1e-12)]


def kernel_marginals(n: int = 4096):
    g = scattering.grid(n)
    marg = scattering.R_pair(g[:, None], g[None, :]).mean(axis=1)
    d = np.max(np.abs(marg - scattering.R_mean(g)))
    e = max(abs(scattering.e_basis(i, g).mean() - 1.0) for i in (1, 2))
    return [CheckResult("marginal of R(k, .) equals R(k)", float(d), 1e-10),
            CheckResult("e_i normalization", float(e), 1e-12)]


def closed_forms():
    out = []
    r = max(abs(resolvent.residue_integral(t) - resolvent.residue_integral_quadrature(t))
            for t in (0.0, 0.3, 0.6, 0.9))
    out.append(CheckResult("residue integral", r, 1e-8))
    a_vals = [6.0 / (7.0 - th) for th in (2.2, 2.5, 3.0)] + [1.5]
    s = max(abs(resolvent.sine_integral(a) - resolvent.sine_integral_quadrature(a)) for a in a_vals)
    out.append(CheckResult("sine integral", s, 1e-6))
    c = max(resolvent.csc_identity_residual(th) for th in (2.2, 2.5, 2.8, 3.0))
    out.append(CheckResult("csc argument identity", c, 1e-12))
    return out


def coefficient_identity(theta: float):
    worst = 0.0
    for g in (0.5, 1.0, 2.0):
        P = ModelParams(theta, gamma0=g)
        worst = max(worst, abs(resolvent.c_small(P) / resolvent.C_big(P) - 1.0))
    return [CheckResult(f"c = C at theta={theta}", worst, 1e-10)]


def chain_conservation(theta: float, n: int = 256, steps: int = 1000, seed: int = 0):
    P = ModelParams(theta)
    s = chain_sim.init_thermal(P, n, 1.0, seed, gamma=1.0)
    h0, p0 = chain_sim.energy(s), chain_sim.total_momentum(s)
    s2 = chain_sim.run(s, chain_sim.default_dt(s), steps, np.random.default_rng(seed + 1))
    dh = abs(chain_sim.energy(s2) - h0) / h0
    dp = abs(chain_sim.total_momentum(s2) - p0) / max(abs(p0), float(np.linalg.norm(s.p)))
    return [CheckResult("chain energy drift", dh, 1e-10),
            CheckResult("chain momentum drift", dp, 1e-10)]


def chain_spectral(theta: float, n: int = 64, seed: int = 0):
    P = ModelParams(theta)
    s = chain_sim.init_thermal(P, n, 1.0, seed, gamma=1.0)
    s = chain_sim.run(s, 0.05, 50, np.random.default_rng(seed + 1))
    d = np.max(np.abs(chain_sim.pair_sums_spectral(s) - chain_sim.pair_sums_dense(s)))
    h = chain_sim.energy(s)
    w = abs(chain_sim.wave_norm(s) - 2.0 * h) / (2.0 * h)
    return [CheckResult("spectral vs real-space potential", float(d), 1e-10),
            CheckResult("wave-function norm equals 2H", w, 1e-12)]


def fracpde_heat():
    L, n, s0, kap = 40.0, 1024, 1.0, 1.3
    f = frac_pde.from_function(lambda y: frac_pde.heat_kernel_gaussian(y, 0.0, kap, s0), L, n, 2.0, kap)
    g = frac_pde.evolve(f, 1.0)
    err = np.max(np.abs(frac_pde.to_real_space(g) - frac_pde.heat_kernel_gaussian(g.y, 1.0, kap, s0)))
    mass = abs(frac_pde.to_real_space(g).sum() * g.dy - frac_pde.to_real_space(f).sum() * f.dy)
    return [CheckResult("heat mode vs Gaussian", float(err), 1e-10),
            CheckResult("fractional flow mass", float(mass), 1e-12)]


def dispersion_asymptotics(theta: float):
    P = ModelParams(theta)
    k = 2.0**-20
    err = abs(dispersion.a_hat(P, k) / dispersion.leading_term(P, k) - 1.0)
    return [CheckResult(f"a_hat leading term at theta={theta}", err, 0.02)]


def difference_quotient_limit(theta: float):
    P = ModelParams(theta)
    eps = 1e-100 if theta == 3.0 else 1e-24
    v = dispersion.rescaled_delta_eps_omega(P, eps, 1.0, 0.7)
    lim = dispersion.rescaled_limit(P, 1.0, 0.7)
    return [CheckResult(f"rescaled difference quotient at theta={theta}", abs(v / lim - 1.0), 0.03)]


def tail_law(theta: float):
    P = ModelParams(theta)
    N = 1e12 if theta > 3 else 1e30
    a, c, _ = kinetic_mc.fit_tail_exponent(P, N, np.geomspace(0.5, 5.0, 7))
    tol = 0.10 if theta == 3.0 else 0.05
    lim = resolvent.C_star(P) * P.gamma0 ** (-P.alpha)
    return [CheckResult(f"tail exponent at theta={theta}", abs(a / P.alpha - 1.0), tol),
            CheckResult(f"tail prefactor at theta={theta}", abs(c / lim - 1.0), 0.10)]


def resolvent_limit(theta: float):
    P = ModelParams(theta)
    if theta > 3.0:
        L = resolvent.limit_value(P, 1.0, 1.0)
        a = resolvent.a_eps(P, 1e-6, 1.0, 1.0)
        return [CheckResult(f"resolvent limit at theta={theta}", abs(a - L) / (L - 1.0), 0.02)]
    a1 = resolvent.a_eps(P, 1e-6, 1.0, 1.0) - 1.0
    a2 = resolvent.a_eps(P, 1e-6, 2.0, 1.0) - 1.0
    expo = np.log2(a2 / a1)
    return [CheckResult(f"resolvent p-exponent at theta={theta}", abs(expo / P.alpha - 1.0), 0.03)]


def run_suite(theta: float, quick: bool = True):
    checks = []
    checks += kernel_decomposition()
    checks += kernel_marginals()
    checks += closed_forms()
    if theta > 2:
        checks += coefficient_identity(theta)
        checks += chain_conservation(theta)
        checks += chain_spectral(theta)
    checks += fracpde_heat()
    if not quick and theta > 2:
        checks += dispersion_asymptotics(theta)
        checks += difference_quotient_limit(theta)
        checks += tail_law(theta)
        checks += resolvent_limit(theta)
    return checks


def format_result(c: CheckResult) -> str:
    tag = "PASS" if c.passed else "FAIL"
    return f"{tag}  {c.name}: {c.value:.3e} (tol {c.tolerance:.0e})"

