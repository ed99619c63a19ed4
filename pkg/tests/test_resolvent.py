import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from fracchain import ModelParams
from fracchain import dispersion as d
from fracchain import resolvent as r
from fracchain.params import DomainError, UnsupportedTheta, stable_index
from fracchain.scattering import R_mean


def test_C_big_theta4():
    expect = math.sqrt(6) / 12 * (2 * math.pi**4 / 3) ** 0.75
    assert r.C_big(ModelParams(4.0)) == pytest.approx(expect, rel=1e-14)
    assert r.C_big(ModelParams(4.0)) == pytest.approx(4.670, abs=5e-4)
    with pytest.raises(UnsupportedTheta):
        r.C_big(ModelParams(2.0))


@pytest.mark.parametrize("theta", [2.2, 2.5, 3.0, 4.0, 6.0])
def test_C_big_gamma_scaling(theta):
    a = r.C_big(ModelParams(theta, gamma0=4.0)) / r.C_big(ModelParams(theta))
    expect = 4.0 ** (-(theta - 1) / (7 - theta)) if theta <= 3 else 0.5
    assert a == pytest.approx(expect, rel=1e-13)


@pytest.mark.parametrize("gamma0", [0.5, 1.0, 2.0])
def test_C_big_branches_meet_at_three(gamma0):
    # C(theta) itself diverges at 3 from both sides, so compare at a common C
    C = 4 * math.pi**2
    lo = r.C_big_branches(3 - 1e-6, gamma0, C)[0]
    hi = r.C_big_branches(3 + 1e-6, gamma0, C)[1]
    assert abs(lo / hi - 1) <= 1e-4
    assert r.C_big_branches(3.0, gamma0, C)[0] == pytest.approx(r.C_big_branches(3.0, gamma0, C)[1], rel=1e-14)


@pytest.mark.parametrize("theta", [2.2, 2.5, 2.8, 3.0, 3.5, 4.0, 6.0])
@pytest.mark.parametrize("gamma0", [0.5, 1.0, 2.0])
def test_two_coefficient_paths_agree(theta, gamma0):
    P = ModelParams(theta, gamma0=gamma0)
    assert abs(r.c_small(P) / r.C_big(P) - 1) <= 1e-10


@pytest.mark.parametrize("theta", [2.2, 2.5, 3.0, 4.0])
def test_gamma_reflection(theta):
    a = stable_index(theta)
    lhs = special.gamma(1 + a) * special.gamma(1 - a)
    assert abs(lhs - math.pi * a / math.sin(math.pi * a)) <= 1e-12 * abs(lhs)


def test_C_star():
    P = ModelParams(4.0)
    expect = 4 * math.pi**2 / 3 * (math.sqrt(2 * math.pi**4 / 3) / (12 * math.pi**2)) ** 1.5
    assert r.C_star(P) == pytest.approx(expect, rel=1e-14)
    # at theta = 3 the low-branch base (theta - 1) sqrt(C) / 24 pi^2 equals sqrt(C) / 12 pi^2
    P3 = ModelParams(3.0)
    C = d.C_theta(P3)
    assert r.C_star(P3) == pytest.approx(4 * math.pi**2 / 3 * (math.sqrt(C) / (12 * math.pi**2)) ** 1.5, rel=1e-14)


def test_csc_identity():
    for th in np.linspace(2.05, 3.0, 20):
        assert r.csc_identity_residual(th) <= 1e-12


def test_residue_integral():
    assert r.residue_integral(0.0) == pytest.approx(math.pi / math.sqrt(2), rel=1e-15)
    assert r.residue_integral(1 - 1e-12) == pytest.approx(math.pi / 2, rel=1e-11)
    for tau in (0.0, 0.3, 0.6, 0.9):
        assert abs(r.residue_integral(tau) - r.residue_integral_quadrature(tau)) <= 1e-8
    with pytest.raises(DomainError):
        r.residue_integral(1.0)


def test_sine_integral():
    assert r.sine_integral(1.5) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-14)
    for a in [6 / (7 - th) for th in (2.2, 2.5, 3.0)] + [1.5]:
        assert r.sine_integral(a) > 0
        assert abs(r.sine_integral(a) - r.sine_integral_quadrature(a)) <= 1e-6
    with pytest.raises(DomainError):
        r.sine_integral(2.0)


@pytest.mark.parametrize("theta", [2.2, 2.5, 3.0])
def test_one_minus_cos_reduction(theta):
    # both sides by quadrature: int (1 - cos)|y|^(-a-1) = (7 - theta)/3 int_0^inf sin y y^-a
    a = 6 / (7 - theta)
    lhs = r.one_minus_cos_integral(a)
    rhs = (7 - theta) / 3 * r.sine_integral_quadrature(a)
    assert abs(lhs - rhs) <= 1e-6


def test_a_eps_p_zero():
    P = ModelParams(4.0)
    vals = [r.a_eps(P, 10.0**-j, 0.0, 1.0) for j in (2, 4, 6)]
    assert all(v <= 1.0 for v in vals)
    assert np.all(np.diff(vals) > 0)
    assert vals[-1] == pytest.approx(1.0, abs=0.01)
    assert r.I_eps(P, 1e-3, 0.0, 1.0) == 0.0


@pytest.mark.parametrize("theta", [2.5, 3.0, 4.0])
def test_decomposition_identity_and_parity(theta):
    P = ModelParams(theta)
    q = r.resolvent_quantities(P, 1e-3, 1.3, 0.7)
    assert abs(q["a_eps"] - (0.7 * q["lambda_part"] + q["I_eps"])) <= 1e-9 * abs(q["a_eps"])
    assert abs(q["a_eps_imag"]) <= 1e-10
    assert r.I_eps(P, 1e-3, -1.3, 0.7) == pytest.approx(q["I_eps"], rel=1e-12)


def test_resolvent_point_validation():
    r.ResolventPoint(0.1, 1.0, 1.0, 1 + 0j)
    with pytest.raises(DomainError):
        r.ResolventPoint(1.0, 1.0, 1.0, 0j)
    with pytest.raises(DomainError):
        r.ResolventPoint(0.1, 1.0, 0.0, 0j)


def test_D_bound_random(rng):
    # |2 gamma R / D_eps| <= 5/4 on 1e5 random points
    worst = 0.0
    for th in (2.2, 2.5, 3.0, 4.0):
        P = ModelParams(th, gamma0=float(rng.uniform(0.2, 5)), s=float(rng.uniform(0, 0.9)))
        for _ in range(25):
            eps = 10 ** rng.uniform(-6, -1)
            p = rng.uniform(-5, 5)
            lam = 10 ** rng.uniform(-2, 2)
            k = rng.uniform(-0.5, 0.5, 1000)
            gamma = eps**P.s * P.gamma0
            D = r.D_eps(P, eps, p, k, lam)
            worst = max(worst, float(np.max(np.abs(2 * gamma * R_mean(k) / D))))
    assert worst <= 1.25


@pytest.mark.parametrize("theta", [2.2, 2.5, 3.0, 4.0])
def test_eps_convergence_monotone(theta):
    P = ModelParams(theta)
    L = r.limit_value(P, 1.0, 1.0)
    errs = [abs(r.a_eps(P, 10.0**-j, 1.0, 1.0) - L) for j in range(2, 7)]
    assert all(np.diff(errs) < 0)


@settings(max_examples=10)
@given(st.sampled_from([2.5, 4.0]), st.floats(0.1, 3.0), st.floats(0.2, 5.0))
def test_a_eps_between_lambda_and_limit(theta, p, lam):
    # the real part of 1 - 2gR/D lies in [0, 1]; a_eps is positive and exceeds the p = 0 value
    P = ModelParams(theta)
    a = r.a_eps(P, 1e-2, p, lam)
    a0 = r.a_eps(P, 1e-2, 0.0, lam)
    assert 0 < a0 <= lam
    assert a >= a0 - 1e-12
