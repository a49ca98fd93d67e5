import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chi3 import invfree as inv
from chi3.errors import DomainError, StabilityError
from chi3.sde import (LinearSDE, SimConfig, TrajectoryEnsemble, balanced_factorization,
                      lyapunov_covariance, moment_ode_oracle, noise_factorization,
                      ou_spectrum_oracle, simulate, welch_estimate)

entry = st.floats(-10, 10)


def _ou(a=(1.0, 2.0), sigma2=(0.5, 0.25)):
    """Two decoupled OU processes with diffusion 2 s_i, variance s_i / a_i."""
    return LinearSDE(drift=np.diag([-a[0], -a[1]]),
                     diffusion=np.diag([2 * sigma2[0], 2 * sigma2[1]]))


def test_factorization_examples():
    D = np.array([[4.0, 2.0], [2.0, 2.0]])
    B = noise_factorization(D)
    assert not np.iscomplexobj(B)
    np.testing.assert_allclose(B @ B.T, D, atol=1e-14)
    assert np.all(noise_factorization(np.zeros((2, 2))) == 0)
    B = noise_factorization(np.array([[0.0, 3.0], [3.0, 0.0]]))
    np.testing.assert_allclose(B @ B.T, [[0, 3], [3, 0]], atol=1e-14)


@given(a=entry, b=entry, c=entry, ai=entry, bi=entry, ci=entry)
def test_factorization_reconstructs(a, b, c, ai, bi, ci):
    for D in (np.array([[a, b], [b, c]]),
              np.array([[a + 1j * ai, b + 1j * bi], [b + 1j * bi, c + 1j * ci]])):
        B = noise_factorization(D)
        scale = max(np.abs(D).max(), 1e-300)
        assert np.abs(B @ B.T - D).max() <= 1e-14 * scale * 8


@given(a=st.floats(0, 10), r=st.floats(-1, 1), c=st.floats(0, 10))
def test_psd_factorization_is_real(a, r, c):
    b = r * math.sqrt(a * c)
    B = noise_factorization(np.array([[a, b], [b, c]]))
    assert not np.iscomplexobj(B)


def test_balanced_factorization_reconstructs():
    D = np.array([[0.0, 2.0], [2.0, -0.3]])
    M = np.array([[-1.0, -5e3], [2e-4, -1.0]])
    B = balanced_factorization(D, M)
    np.testing.assert_allclose(B @ B.T, D, atol=1e-14)


def test_zero_diffusion_is_deterministic():
    sde = LinearSDE(drift=np.array([[-1.0, 0.5], [-0.5, -1.0]]), diffusion=np.zeros((2, 2)),
                    drive=np.array([1.0, 2.0]))
    ens = simulate(sde, SimConfig(n_traj=3, dt=0.01, t_max=1.0))
    np.testing.assert_allclose(ens.samples, np.broadcast_to(sde.fixed_point().real,
                                                            ens.samples.shape), atol=1e-13)


def test_ou_variance_within_errors():
    sde = _ou()
    ens = simulate(sde, SimConfig(n_traj=400, dt=0.005, t_max=20.0, seed=11,
                                  record_every=10))
    m = ens.moments()
    var = np.diag(m["m2"]).real
    se = np.diag(m["m2_se"]).real
    np.testing.assert_array_less(np.abs(var - [0.5, 0.125]), 3 * se + 0.01 * var)
    np.testing.assert_allclose(lyapunov_covariance(sde), np.diag([0.5, 0.125]), atol=1e-14)


def test_invfree_ensemble_moments_within_errors():
    c = inv.coeffs_from_generation(2.0, 0.05, 2.0, 1.0, 1.0)
    sde = c.langevin()
    ens = simulate(sde, SimConfig(n_traj=400, dt=0.005, t_max=15.0, seed=3,
                                  record_every=5))
    assert ens.noise_mode == "complex"
    m = ens.moments()
    exact = inv.steady_moments(c)
    n = m["m2"][0, 1]
    assert abs(n.real - exact.mean_n) < 3 * m["m2_se"][0, 1].real + 1e-3
    a2 = m["m2"][0, 0]
    assert abs(a2.real - exact.mean_alpha2.real) < 3 * m["m2_se"][0, 0].real + 1e-3


def test_chunking_and_reproducibility():
    sde = _ou()
    a = simulate(sde, SimConfig(n_traj=7, dt=0.01, t_max=2.0, seed=5, chunk=3, block=17))
    b = simulate(sde, SimConfig(n_traj=7, dt=0.01, t_max=2.0, seed=5))
    assert np.array_equal(a.samples, b.samples)
    c = simulate(sde, SimConfig(n_traj=7, dt=0.01, t_max=2.0, seed=6))
    assert not np.array_equal(a.samples, c.samples)


def test_simulate_guards():
    with pytest.raises(DomainError):
        simulate(_ou(), SimConfig(dt=0.1))
    bad = LinearSDE(drift=np.diag([0.1, -1.0]), diffusion=np.eye(2))
    with pytest.raises(StabilityError):
        simulate(bad, SimConfig(n_traj=2, t_max=1.0))
    ens = simulate(bad, SimConfig(n_traj=2, t_max=1.0, stationary=False))
    assert ens.mean is None
    with pytest.raises(ValueError):
        SimConfig(n_traj=0)
    with pytest.raises(ValueError):
        LinearSDE(drift=np.eye(2), diffusion=np.array([[1.0, 1.0], [0.0, 1.0]]))


def _white(n_traj, n, sigma2, dt, seed=0):
    rng = np.random.default_rng(seed)
    x = np.zeros((n_traj, n, 2))
    x[..., 0] = rng.normal(0, math.sqrt(sigma2), (n_traj, n))
    return TrajectoryEnsemble(samples=x, dt=dt, dt_sample=dt, t_max=n * dt, rng_seed=seed,
                              n_traj=n_traj, mean=np.zeros(2))


def test_welch_white_noise_calibration():
    ens = _white(200, 1700, 0.7, 0.05)
    w = np.linspace(0, math.pi / 0.05 * 0.9, 20)
    est, se = welch_estimate(ens, [1.0, 0.0], w)
    level = 0.7 * 0.05
    z = (est - level) / se
    assert np.mean(np.abs(z) < 3) >= 0.9
    assert abs(est.mean() / level - 1) < 0.01


def test_welch_errors_shrink_with_ensemble_size():
    w = np.linspace(0.5, 20, 10)
    _, se1 = welch_estimate(_white(100, 1700, 1.0, 0.05, seed=1), [1.0, 0.0], w)
    _, se2 = welch_estimate(_white(200, 1700, 1.0, 0.05, seed=2), [1.0, 0.0], w)
    assert 1.1 < np.mean(se1 / se2) < 1.75


def test_welch_guards():
    ens = _white(4, 100, 1.0, 0.1)
    with pytest.raises(DomainError):
        welch_estimate(ens, [1.0, 0.0], [0.0], min_segments=200)
    with pytest.raises(DomainError, match="resolution"):
        welch_estimate(ens, [1.0, 0.0], [0.0], linewidth=0.1)


def test_welch_on_ou_matches_oracle():
    sde = _ou(a=(1.0, 1.0), sigma2=(1.0, 1.0))
    ens = simulate(sde, SimConfig(n_traj=300, dt=0.01, t_max=17 * 32.0, seed=21,
                                  record_every=5))
    w = np.linspace(0, 4, 17)
    est, se = welch_estimate(ens, [1.0, 0.0], w, linewidth=1.0)
    ref = ou_spectrum_oracle(sde, w, [1.0, 0.0])
    assert np.mean(np.abs(est - ref) < 3 * se) >= 0.9


def test_ou_oracle_diagonal_is_lorentzian_sum():
    sde = _ou()
    w = np.linspace(-5, 5, 11)
    ref = 1.0 / (w ** 2 + 1) + 2.25 * 0.5 / (w ** 2 + 4)
    np.testing.assert_allclose(ou_spectrum_oracle(sde, w, [1.0, 1.5]), ref, rtol=1e-14)


def test_ou_oracle_integrates_to_variance():
    M = np.array([[-1.0, 2.0], [-0.7, -0.4]])
    D = np.array([[1.0, 0.3], [0.3, 0.5]])
    sde = LinearSDE(drift=M, diffusion=D)
    w = np.linspace(-200, 200, 40001)
    q = np.array([0.8, -0.6])
    area = np.trapezoid(ou_spectrum_oracle(sde, w, q), w) / (2 * math.pi)
    var = q @ lyapunov_covariance(sde).real @ q
    assert area == pytest.approx(var, rel=5e-3)
    zero = LinearSDE(drift=M, diffusion=np.zeros((2, 2)))
    assert np.all(ou_spectrum_oracle(zero, w[:5], q) == 0)


def test_moment_oracle_matches_lyapunov():
    M = np.array([[-1.0, 2.0], [-0.7, -0.4]])
    D = np.array([[1.0, 0.3], [0.3, 0.5]])
    sde = LinearSDE(drift=M, diffusion=D, drive=np.array([0.3, -0.2]))
    sol = moment_ode_oracle(sde)
    mean = sde.fixed_point()
    np.testing.assert_allclose(sol.mean, mean, atol=1e-12)
    cov = sol.second - np.outer(mean, mean)
    np.testing.assert_allclose(cov, lyapunov_covariance(sde), atol=1e-12)
    assert sol.residual < 1e-12


def test_moment_oracle_theta_and_instability():
    c = inv.coeffs_from_generation(1.0, 0.1, 1.0, 0.0, 0.7)
    a = moment_ode_oracle(c, Theta=0.4)
    assert a.theta == 0.4
    assert complex(a.mu) == pytest.approx(complex(inv.steady_moments(c, 0.4).mu),
                                          rel=1e-10)
    with pytest.raises(StabilityError):
        moment_ode_oracle(LinearSDE(drift=np.diag([0.2, -1.0]), diffusion=np.eye(2)))


@settings(max_examples=25, deadline=None)
@given(q0=st.floats(0.01, 10), beta=st.floats(0, 0.3), x=st.floats(0, 4),
       a0=st.floats(0, 5), det=st.floats(-2, 2))
def test_moment_oracle_agrees_with_closed_forms(q0, beta, x, a0, det):
    c = inv.coeffs_from_generation(q0, beta, 1.0, x, a0)
    c = inv.InvFreeCoeffs(k=c.k + 1j * det, Lam_aa=c.Lam_aa, Lam_aas=c.Lam_aas, b=c.b,
                          a0=a0)
    m, o = inv.steady_moments(c), moment_ode_oracle(c)
    scale = max(abs(m.mean_n), abs(m.mean_alpha2), 1e-12)
    assert abs(o.mean_n - m.mean_n) <= 1e-8 * scale
    assert abs(o.mean_alpha2 - m.mean_alpha2) <= 1e-8 * scale
