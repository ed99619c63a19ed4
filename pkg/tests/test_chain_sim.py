import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special, stats

from fracchain import ModelParams
from fracchain import chain_sim as cs
from fracchain import dispersion as d
from fracchain.params import DomainError, InsufficientReplicas


@pytest.fixture(scope="module")
def lat4():
    return cs.Lattice.build(ModelParams(4.0), 64)


def test_periodized_coupling():
    P = ModelParams(2.5)
    a = cs.periodize_alpha(P, 256)
    assert abs(math.fsum(a)) <= 1e-14
    assert np.array_equal(a[1:], a[1:][::-1])
    assert np.max(np.abs(np.fft.fft(a).real - cs.mode_symbol(P, 256))) <= 1e-13
    big, bigger = cs.periodize_alpha(P, 2**10), cs.periodize_alpha(P, 2**14)
    # images at distance >= n - 3 bound the change at x = 3
    bound = 2 * sum((m * 2**10 - 3) ** -2.5 for m in range(1, 1000))
    assert abs(big[3] - bigger[3]) <= bound
    assert abs(bigger[3] + 3**-2.5) <= 2 * special.zeta(2.5) * (2**14 - 3) ** -2.5
    with pytest.raises(DomainError):
        cs.periodize_alpha(P, 4)


def test_state_invariants(lat4):
    s = cs.init_thermal(ModelParams(4.0), 64, 1.0, 0, lattice=lat4)
    assert s.mode_freq[0] == 0
    assert np.all(s.mode_freq[1:] > 0)
    assert abs(s.q.mean()) <= 1e-15
    with pytest.raises(ValueError):
        s.p[0] = 1.0
    with pytest.raises(DomainError):
        cs.ChainState(12, np.zeros(12), np.zeros(12), 0.0, 0.0, np.zeros(12), np.zeros(12))


def test_equipartition():
    P = ModelParams(4.0)
    lat = cs.Lattice.build(P, 256)
    states = cs.ensemble(lambda ss: cs.init_thermal(P, 256, 1.5, ss, lattice=lat), 1000, 3)
    e = np.array([cs.energy(s) for s in states]) / 256
    assert e.mean() == pytest.approx(1.5, rel=0.02)
    p = np.array([s.p for s in states]).ravel()
    assert abs(p.mean()) <= 3 * p.std() / math.sqrt(p.size)


def test_thermal_condition_bounded():
    P = ModelParams(2.5)
    vals = []
    for n in (2**8, 2**10, 2**12):
        lat = cs.Lattice.build(P, n)
        states = cs.ensemble(lambda ss: cs.init_thermal(P, n, 1.0, ss, lattice=lat), 40, n)
        vals.append(cs.thermal_condition_statistic(states))
    # E|psi^|^2 = 2 n T per mode, so the statistic tends to 4 T^2 (plus sampling noise)
    assert max(vals) < 6.0
    assert min(vals) > 3.5


def test_harmonic_step_conserves_energy(lat4):
    s = cs.init_thermal(ModelParams(4.0), 64, 1.0, 1, lattice=lat4)
    h0 = cs.energy(s)
    s2 = cs.step_harmonic(s, 0.37)
    assert abs(cs.energy(s2) - h0) <= 1e-13 * h0
    with pytest.raises(DomainError):
        cs.step_harmonic(s, 0.0)


def test_single_mode_closed_form_and_period(lat4):
    n, j = 64, 5
    x = np.arange(n)
    q0 = np.cos(2 * np.pi * j * x / n)
    s = lat4.state(np.zeros(n), q0, 0.0)
    w = lat4.mode_freq[j]
    assert w == pytest.approx(math.sqrt(d.a_hat(ModelParams(4.0), j / n)), rel=1e-14)
    t = 0.83
    s1 = cs.step_harmonic(s, t)
    assert np.max(np.abs(s1.q - math.cos(w * t) * q0)) <= 1e-12
    assert np.max(np.abs(s1.p + w * math.sin(w * t) * q0)) <= 1e-12
    s2 = cs.step_harmonic(s, 2 * np.pi / w)
    assert np.max(np.abs(s2.q - q0)) <= 1e-12
    assert np.max(np.abs(s2.p)) <= 1e-12


def test_zero_mode_free_flight(lat4):
    n = 64
    s = lat4.state(np.full(n, 0.5), np.zeros(n), 0.0)
    s1 = cs.step_harmonic(s, 2.0)
    assert np.allclose(s1.q, 1.0, atol=1e-14)
    assert np.allclose(s1.p, 0.5, atol=1e-14)


def test_noise_step_invariants(lat4, rng):
    s = cs.init_thermal(ModelParams(4.0), 64, 1.0, 2, gamma=1.0, lattice=lat4)
    s1 = cs.step_noise(s, 0.1, rng)
    assert abs(s1.p.sum() - s.p.sum()) <= 1e-13 * np.abs(s.p).sum()
    assert abs(np.dot(s1.p, s1.p) - np.dot(s.p, s.p)) <= 1e-13 * np.dot(s.p, s.p)
    assert np.array_equal(s1.q, s.q)
    s0 = cs.step_noise(lat4.state(s.p, s.q, 0.0), 0.1, rng)
    assert np.array_equal(s0.p, s.p)


def test_noise_locality(rng):
    p = rng.standard_normal(16)
    a = np.zeros(16)
    a[7] = 0.3
    out = cs.apply_noise(p, a)
    changed = np.flatnonzero(out != p)
    assert set(changed) <= {6, 7, 8}
    assert len(changed) == 3
    assert out[6:9].sum() == pytest.approx(p[6:9].sum(), abs=1e-15)


def _Y_matrices(n):
    # Y_z p: d/ds of (p_{z-1}, p_z, p_{z+1}) = (p_z - p_{z+1}, p_{z+1} - p_{z-1}, p_{z-1} - p_z)
    Ys = []
    for z in range(n):
        m, l, r = z % n, (z - 1) % n, (z + 1) % n
        Y = np.zeros((n, n))
        Y[l, m] += 1
        Y[l, r] -= 1
        Y[m, r] += 1
        Y[m, l] -= 1
        Y[r, l] += 1
        Y[r, m] -= 1
        Ys.append(Y)
    return np.array(Ys)


def test_noise_matches_euler_maruyama_oracle():
    # Ito SDE dp = (gamma/2) sum_z Y_z^2 p dt + sqrt(gamma) sum_z (Y_z p) dW_z,
    # integrated at dt/100, against one exact-rotation step of size dt
    n, gamma, dt, reps = 8, 1.0, 0.002, 200_000
    r = np.random.default_rng(7)
    p0 = r.standard_normal(n)
    Ys = _Y_matrices(n)
    drift_mat = 0.5 * gamma * np.einsum("zij,zjk->ik", Ys, Ys)
    a = math.sqrt(gamma * dt) * r.standard_normal((reps, n))
    rot = np.array([cs.apply_noise(p0, a[i]) for i in range(reps)]) - p0
    P = np.tile(p0, (reps, 1))
    h = dt / 100
    for _ in range(100):
        dW = math.sqrt(h) * r.standard_normal((reps, n))
        Yp = np.einsum("zij,rj->rzi", Ys, P)
        P = P + h * P @ drift_mat.T + math.sqrt(gamma) * np.einsum("rzi,rz->ri", Yp, dW)
    em = P - p0
    m2_rot, m2_em = (rot**2).mean(0) / dt, (em**2).mean(0) / dt
    assert np.max(np.abs(m2_rot / m2_em - 1)) <= 0.02
    # drift: within 4 standard errors of each other
    se = np.sqrt(rot.var(0) / reps + em.var(0) / reps)
    assert np.all(np.abs(rot.mean(0) - em.mean(0)) <= 4 * se)
    # and the oracle's drift is the (gamma/2) sum Y^2 generator
    assert np.all(np.abs(em.mean(0) - dt * drift_mat @ p0) <= 4 * np.sqrt(em.var(0) / reps))


def test_run_conservation_and_replay():
    P = ModelParams(2.5)
    s = cs.init_thermal(P, 128, 1.0, 4, gamma=1.0)
    dt = cs.default_dt(s)
    a = cs.run(s, dt, 2000, np.random.default_rng(9))
    b = cs.run(s, dt, 2000, np.random.default_rng(9))
    assert np.array_equal(a.p, b.p) and np.array_equal(a.q, b.q)
    assert abs(cs.energy(a) / cs.energy(s) - 1) <= 1e-10
    assert abs(cs.total_momentum(a) - cs.total_momentum(s)) <= 1e-10 * np.linalg.norm(s.p)
    assert a.t == pytest.approx(2000 * dt)


def test_run_observer_and_wave_norm_invariance():
    P = ModelParams(4.0)
    s = cs.init_thermal(P, 64, 1.0, 5, gamma=0.5)
    h0 = cs.energy(s)
    norms = []
    cs.run(s, 0.05, 500, np.random.default_rng(1),
           observe=lambda i, q, p: norms.append(cs.wave_norm(cs.replace(s, q=q, p=p))), every=50)
    assert len(norms) == 11
    assert max(abs(v - 2 * h0) for v in norms) <= 1e-10 * h0


def test_site_energy(lat4, rng):
    n = 64
    p = np.zeros(n)
    p[0] = 1.0
    s = lat4.state(p, np.full(n, 0.3), 0.0)
    e = cs.site_energy(s)
    assert e[0] == pytest.approx(0.5, abs=1e-15)
    assert np.max(np.abs(e[1:])) <= 1e-15
    s = lat4.state(rng.standard_normal(n), rng.standard_normal(n), 0.0)
    assert abs(cs.site_energy(s).sum() - cs.energy(s)) <= 1e-12 * cs.energy(s)
    assert np.max(np.abs(cs.pair_sums(s) - cs.pair_sums_dense(s))) <= 1e-12


@pytest.mark.parametrize("theta", [2.5, 4.0])
def test_spectral_potential_matches_real_space(theta, rng):
    P = ModelParams(theta)
    s = cs.init_thermal(P, 64, 1.0, 6, gamma=1.0)
    s = cs.run(s, 0.05, 20, rng)
    assert np.max(np.abs(cs.pair_sums_spectral(s) - cs.pair_sums_dense(s))) <= 1e-10


def test_wave_function(lat4, rng):
    z = lat4.state(np.zeros(64), np.zeros(64), 0.0)
    assert np.all(cs.wave_function(z) == 0)
    s = lat4.state(rng.standard_normal(64), rng.standard_normal(64), 0.0)
    assert abs(cs.wave_norm(s) - 2 * cs.energy(s)) <= 1e-12 * cs.energy(s)


def test_wigner_estimates():
    P = ModelParams(4.0)
    n, T = 64, 1.3
    lat = cs.Lattice.build(P, n)
    states = cs.ensemble(lambda ss: cs.init_thermal(P, n, T, ss, lattice=lat), 400, 8)
    sd = cs.estimate_wigner(states, "spectral_density")
    # Gibbs: E|psi^_j|^2 = 2 n T, so (eps/2) E|psi^|^2 = T on every mode except
    # the zero mode, which carries only kinetic energy (T / 2)
    z = (sd.values[1:] - T) / sd.stderr[1:]
    assert np.max(np.abs(z)) < 5
    assert abs(sd.values[1:].mean() / T - 1) < 0.02
    assert abs(sd.values[0] - T / 2) < 5 * sd.stderr[0]
    ep = cs.estimate_wigner(states, "energy_profile")
    mean_h = np.mean([cs.energy(s) for s in states])
    assert ep.values.sum() == pytest.approx(ep.eps * mean_h, rel=1e-12)
    with pytest.raises(InsufficientReplicas):
        cs.estimate_wigner(states[:29], "energy_profile")


def test_gibbs_stationarity_p_marginal():
    P = ModelParams(2.5)
    n = 128
    lat = cs.Lattice.build(P, n)
    rngs = cs.replica_rngs(11, 40)
    before, after = [], []
    for i, ss in enumerate(np.random.SeedSequence(10).spawn(40)):
        s = cs.init_thermal(P, n, 1.0, ss, gamma=1.0, lattice=lat)
        before.append(s.p)
        after.append(cs.run(s, cs.default_dt(s), 1000, rngs[i]).p)
    assert stats.ks_2samp(np.ravel(before), np.ravel(after)).pvalue > 0.01
    assert stats.kstest(np.ravel(after), "norm").pvalue > 0.01


def test_wave_and_site_energy_agree_as_n_grows():
    # |(eps/2) sum E|psi_x|^2 J(eps x) - eps sum E e_x J(eps x)| on a smooth
    # temperature profile, evolved for a while, falls as n doubles
    P = ModelParams(2.5)
    J = lambda u: np.exp(np.cos(2 * np.pi * u))
    prof = lambda u: 1 + 0.8 * np.cos(2 * np.pi * u)
    out = []
    for n in (128, 256, 512, 1024):
        lat = cs.Lattice.build(P, n)
        eps = 1 / n
        Jx = J(np.arange(n) * eps)
        D = []
        for ss in np.random.SeedSequence(5).spawn(40):
            s = cs.init_hot_spot(P, n, 1.0, 0, ss, gamma=1.0, lattice=lat, profile=prof)
            s = cs.run(s, cs.default_dt(s), 200, np.random.default_rng(ss.spawn(1)[0]))
            a = 0.5 * eps * np.sum(np.abs(cs.wave_real_space(s)) ** 2 * Jx)
            b = eps * np.sum(cs.site_energy(s) * Jx)
            D.append(a - b)
        out.append(np.mean(np.abs(D)))
    assert all(np.diff(out) < 0)


def test_hot_spot_spreads():
    P = ModelParams(4.0)
    n = 128
    lat = cs.Lattice.build(P, n)
    var = []
    for steps in (0, 400, 1600):
        states = []
        for i, ss in enumerate(np.random.SeedSequence(21).spawn(40)):
            s = cs.init_hot_spot(P, n, 1.0, 8, ss, gamma=1.0, lattice=lat)
            if steps:
                s = cs.run(s, 0.05, steps, np.random.default_rng(ss.spawn(1)[0]))
            states.append(s)
        ep = cs.estimate_wigner(states, "energy_profile")
        assert np.all(ep.values >= -3 * ep.stderr)
        var.append(cs.profile_variance(ep.values, centre=n / 2))
    assert var[0] < var[1] < var[2]


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 2.0), st.floats(1e-3, 0.2))
def test_strang_step_conserves(seed, gamma, dt):
    P = ModelParams(3.0)
    s = cs.init_thermal(P, 16, 1.0, seed, gamma=gamma)
    s1 = cs.run(s, dt, 5, np.random.default_rng(seed))
    assert abs(cs.energy(s1) - cs.energy(s)) <= 1e-12 * cs.energy(s)
    assert abs(cs.total_momentum(s1) - cs.total_momentum(s)) <= 1e-12 * max(1.0, np.abs(s.p).sum())
