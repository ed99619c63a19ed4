import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracchain import scattering as sc

ks = st.floats(-0.5, 0.5, allow_nan=False, exclude_max=True)


def test_r_kernel_special_values():
    assert sc.r_kernel(0.0, 0.3) == pytest.approx(0.0, abs=1e-15)
    assert sc.r_kernel(0.2, 0.2) == pytest.approx(0.0, abs=1e-15)
    # coupling derived from the three-site noise: 2 * 1/2 * 1 + 2 * 1 * 1/2
    assert sc.r_kernel(0.25, 0.0) == pytest.approx(2.0, abs=1e-14)


def test_literal_single_weight_reading_breaks_rank_two_identity(rng):
    def r_alt(k, kp):
        d = k - kp
        return 2 * np.sin(np.pi * k) ** 2 * np.sin(2 * np.pi * d) + np.sin(2 * np.pi * k) * np.sin(np.pi * d) ** 2

    k, kp = rng.uniform(-0.5, 0.5, (2, 1000))
    R_alt = 0.5 * (r_alt(k, k + kp) ** 2 + r_alt(k, k - kp) ** 2)
    assert np.max(np.abs(R_alt - sc.R_pair_decomposed(k, kp))) > 0.1
    assert np.max(np.abs(sc.R_pair(k, kp) - sc.R_pair_decomposed(k, kp))) <= 1e-12


def test_R_mean_values():
    assert sc.R_mean(0.0) == 0.0
    assert sc.R_mean(0.5) == pytest.approx(2.0, abs=1e-14)
    assert sc.R_mean(0.25) == pytest.approx(2.0, abs=1e-14)


def test_R_mean_small_k():
    k = 2.0**-16
    assert sc.R_mean(k) / k**2 == pytest.approx(6 * np.pi**2, rel=0.01)


def test_e_basis_values_and_normalization():
    assert sc.e_basis(1, 0.25) == pytest.approx(2.0 / 3.0, abs=1e-14)
    assert sc.e_basis(2, 0.25) == pytest.approx(2.0, abs=1e-14)
    g = sc.grid(64)
    for i in (1, 2):
        assert abs(sc.e_basis(i, g).mean() - 1.0) <= 1e-12
        assert np.allclose(sc.e_basis(i, g), sc.e_basis(i, -g), atol=1e-15)


def test_pair_symmetry_and_decomposition(rng):
    k, kp = rng.uniform(-0.5, 0.5, (2, 10_000))
    assert np.max(np.abs(sc.R_pair(k, kp) - sc.R_pair(kp, k))) <= 1e-12
    assert np.max(np.abs(sc.R_pair(k, kp) - sc.R_pair_decomposed(k, kp))) <= 1e-12
    assert np.max(np.abs(sc.R_p_kernel(k, kp, 0.0) - sc.R_pair(k, kp))) <= 1e-12
    assert np.all(sc.R_pair(k, kp) >= 0)


def test_R_p_kernel_vanishes_on_resonance():
    p = 0.3
    k = p / 2
    assert abs(sc.R_p_kernel_product(k, 0.17, p)) <= 1e-14
    assert abs(sc.R_p_kernel(k, 0.17, p)) <= 1e-13


def test_marginal_on_fine_grid():
    g = sc.grid(2**14)
    k = np.linspace(-0.5, 0.5, 50, endpoint=False)
    marg = sc.R_pair(k[:, None], g[None, :]).mean(axis=1)
    assert np.max(np.abs(marg - sc.R_mean(k))) <= 1e-10


def test_L_constant_and_mass(rng):
    n = 128
    c = sc.GridFunction(n, np.full(n, 3.7))
    assert np.max(np.abs(sc.L_apply(c).values)) <= 1e-14
    f = sc.GridFunction(n, rng.standard_normal(n))
    assert abs(sc.L_apply(f).integral()) <= 1e-13


def test_L_fast_vs_dense(rng):
    f = sc.GridFunction(256, rng.standard_normal(256) + 1j * rng.standard_normal(256))
    assert np.max(np.abs(sc.L_apply(f).values - sc.L_apply_dense(f).values)) <= 1e-12


def test_dirichlet_forms_agree(rng):
    f = sc.GridFunction(128, rng.standard_normal(128))
    assert sc.dirichlet_form(sc.GridFunction(128, np.ones(128))) == pytest.approx(0.0, abs=1e-14)
    assert abs(sc.dirichlet_form(f) - sc.dirichlet_form_double(f)) <= 1e-10


def test_grid_function_validation():
    with pytest.raises(ValueError):
        sc.GridFunction(5, np.zeros(5))
    with pytest.raises(ValueError):
        sc.inner(sc.GridFunction(4, np.zeros(4)), sc.GridFunction(8, np.zeros(8)))


@given(st.integers(0, 2**32 - 1))
def test_L_self_adjoint_and_nonpositive(seed):
    r = np.random.default_rng(seed)
    n = 64
    f = sc.GridFunction(n, r.standard_normal(n))
    g = sc.GridFunction(n, r.standard_normal(n))
    assert abs(sc.inner(g, sc.L_apply(f)) - sc.inner(sc.L_apply(g), f)) <= 1e-10
    assert sc.inner(f, sc.L_apply(f)) <= 1e-14
    assert sc.dirichlet_form(f) >= -1e-14


@given(ks, ks, st.floats(-1, 1))
def test_product_form_matches_sum_form(k, kp, p):
    assert abs(sc.R_p_kernel(k, kp, p) - sc.R_p_kernel_product(k, kp, p)) <= 1e-12


@given(ks, ks)
def test_R_pair_nonneg_symmetric(k, kp):
    assert sc.R_pair(k, kp) >= 0
    assert abs(sc.R_pair(k, kp) - sc.R_pair(kp, k)) <= 1e-13
