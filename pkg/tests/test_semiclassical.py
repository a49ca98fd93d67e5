import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import solve_ivp

from chi3 import linearized as lin
from chi3.errors import DomainError
from chi3.params import MediumParams, Susceptibilities, susceptibilities, transparent
from chi3.semiclassical import (amplitude_rhs, effective_dispersion,
                                oscillation_frequency, power_ratio, steady_state)


def _s(kappa1, chi1, beta=1e-3):
    return Susceptibilities(linear=complex(kappa1, 0), cubic=complex(chi1, 0), beta=beta)


def test_dark_cavity_is_a_fixed_point():
    p = MediumParams(a0=0.0)
    assert amplitude_rhs(0j, p, susceptibilities(p)) == 0


def test_transparent_rhs_structure():
    p = MediumParams(a0=3.0)
    s = transparent(susceptibilities(p))
    z = 0.3 - 1.2j
    expect = (1j * s.kappa1 - 1j * s.chi1 * abs(z) ** 2) * z - 0.5 * p.C * z + p.a0
    assert amplitude_rhs(z, p, s) == pytest.approx(expect, rel=1e-15)


def test_rhs_matches_finite_difference_of_trajectory():
    p = MediumParams(a0=2.0, omega_offset=0.3, f1s=0.8, f2s=0.1)
    s = susceptibilities(p)
    z0 = 0.7 + 0.4j

    def f(t, y):
        d = amplitude_rhs(y[0] + 1j * y[1], p, s, t)
        return [d.real, d.imag]

    h = 1e-4
    sol = solve_ivp(f, (0, h), [z0.real, z0.imag], rtol=1e-12, atol=1e-14,
                    t_eval=[h], method="DOP853")
    sol_m = solve_ivp(f, (0, -h), [z0.real, z0.imag], rtol=1e-12, atol=1e-14,
                      t_eval=[-h], method="DOP853")
    fd = ((sol.y[0, 0] - sol_m.y[0, 0]) + 1j * (sol.y[1, 0] - sol_m.y[1, 0])) / (2 * h)
    assert fd == pytest.approx(complex(amplitude_rhs(z0, p, s, 0.0)), rel=1e-7)


def test_drive_frame_agrees_with_cavity_frame():
    p = MediumParams(a0=2.0, omega_offset=0.7)
    s = transparent(susceptibilities(p))
    zd, t = 0.5 + 0.2j, 1.3
    rot = np.exp(1j * p.omega_offset * t)
    lhs = amplitude_rhs(zd * rot, p, s, t, frame="cavity")
    rhs = (amplitude_rhs(zd, p, s, frame="drive") + 1j * p.omega_offset * zd) * rot
    assert lhs == pytest.approx(rhs, rel=1e-14)


def test_linear_medium_closed_form():
    p = MediumParams(a0=3.0)
    st_ = steady_state(p, _s(1.5, 0.0))
    A = p.A
    assert st_.U == pytest.approx(9.0 / (A * A + 1.5 ** 2), rel=1e-15)


def test_resonant_empty_cavity():
    p = MediumParams(a0=3.0)
    st_ = steady_state(p, _s(0.0, 0.0))
    assert st_.U == pytest.approx((2 * 3.0 / p.C) ** 2) and st_.phi0 == 0.0


def test_zero_drive():
    st_ = steady_state(MediumParams(a0=0.0), _s(1.0, 0.1))
    assert st_.U == 0 and st_.z == 0


def test_bistable_roots_match_grid_scan():
    # kappa = 3, chi = 0.05, A = 1: the cubic has three positive roots
    p = MediumParams(a0=8.0)
    s = _s(3.0, 0.05)
    roots = steady_state(p, s, all_roots=True)
    assert len(roots) == 3
    assert roots[0].reachable and not roots[1].reachable
    assert [r.stable for r in roots] == [True, False, True]
    k, c, A = 3.0, 0.05, p.A
    U = np.linspace(1e-6, 200, 2_000_001)
    f = U * (A * A + (k - c * U) ** 2) - p.a0 ** 2
    scan = U[:-1][np.sign(f[:-1]) != np.sign(f[1:])]
    assert len(scan) == 3
    np.testing.assert_allclose([r.U for r in roots], scan, atol=2e-4)


@given(a0=st.floats(0.1, 50), kappa=st.floats(-5, 5), chi=st.floats(-0.2, 0.2))
def test_roots_have_small_residual(a0, kappa, chi):
    p = MediumParams(a0=a0)
    s = _s(kappa, chi)
    for r in steady_state(p, s, all_roots=True):
        res = abs(complex(amplitude_rhs(r.z, p, s, frame="drive")))
        assert res < 1e-10 * (p.C * r.U + a0)
        assert r.U == pytest.approx(abs(r.z) ** 2, rel=1e-12)


def test_phase_equations():
    p = MediumParams()
    s = transparent(susceptibilities(p))
    r = steady_state(p, s)
    kappa, chi = effective_dispersion(p, s)
    sU = math.sqrt(r.U)
    assert -p.C * r.U + 2 * p.a0 * sU * math.cos(r.phi0) == pytest.approx(0, abs=1e-9)
    assert kappa - chi * r.U - p.a0 * math.sin(r.phi0) / sU == pytest.approx(0, abs=1e-12)


def test_small_chi_limit():
    p = MediumParams(a0=3.0)
    exact = 9.0 / (p.A ** 2 + 4.0)
    for chi in (1e-3, 1e-6, 1e-9):
        assert steady_state(p, _s(2.0, chi)).U == pytest.approx(exact, rel=20 * chi)


def test_power_ratio_examples():
    assert power_ratio(0.0, 1.0) == 1.0
    assert power_ratio(1.0, 1.0) == pytest.approx(0.5)
    assert power_ratio(0.0, 1e-12) < 1e-11
    with pytest.raises(DomainError):
        power_ratio(0.0, 0.0)


@given(t=st.floats(-1e3, 1e3), eps=st.floats(1e-6, 1e6))
def test_power_ratio_bounded(t, eps):
    assert power_ratio(t, eps) <= 1.0
    if not (t == 0 and eps == 1):
        assert power_ratio(t, eps) < 1.0 or abs(t) < 1e-8 and abs(eps - 1) < 1e-4


def test_oscillation_frequency_limits():
    p = MediumParams()
    s = transparent(susceptibilities(p))
    dd = lin.drift_diffusion("hm", p, s, 1e-6 / s.beta)
    assert oscillation_frequency(dd) == pytest.approx(s.kappa1 ** 2, rel=1e-5)
    assert oscillation_frequency(lin.DriftDiffusion(A=1, A12=0, A21=3)) == 0


@given(bu=st.floats(1e-4, 0.3), kappa=st.floats(0.1, 10))
def test_omega2_factorizes(bu, kappa):
    beta = 1e-3
    p = MediumParams()
    s = _s(kappa, beta * kappa, beta)
    dd = lin.drift_diffusion("hm", p, s, bu / beta)
    assert oscillation_frequency(dd) == pytest.approx(
        kappa ** 2 * (1 - bu) * (1 - 3 * bu), rel=1e-11)
