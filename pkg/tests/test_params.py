from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from chi3.errors import DomainError
from chi3.params import (MediumParams, Susceptibilities, effective_gammas,
                         load_params, model_reduction_check, susceptibilities,
                         transparent, validate_regime)

pos = st.floats(1e-3, 1e3)


def test_on_resonance_linear_susceptibility_is_imaginary():
    p = MediumParams(N=1, g=1, Delta=0, gamma=1)
    assert susceptibilities(p).linear == 1j


@given(gamma=pos, Delta=st.floats(0.5, 1e3), g=st.floats(1e-3, 10), N=st.floats(1, 1e6))
def test_absorption_over_dispersion_is_inverse_detuning(gamma, Delta, g, N):
    p = MediumParams(gamma=gamma, Delta=Delta, g=g, N=N)
    s = susceptibilities(p)
    assert s.kappa2 * p.x == pytest.approx(s.kappa1, rel=1e-13)
    assert s.chi2 * p.x == pytest.approx(s.chi1, rel=1e-13)
    assert s.cubic / s.linear == pytest.approx(s.beta, rel=1e-14)
    assert s.beta > 0


def test_susceptibilities_against_exact_rational_arithmetic():
    p = MediumParams(N=2, g=0.5, Delta=10, gamma=1, Gamma1=1, Gamma2=1)
    s = susceptibilities(p)
    # N g^2 / (Delta - i gamma) = N g^2 (Delta + i gamma) / (Delta^2 + gamma^2)
    N, g, D, gm, G1, G2 = (Fraction(v) for v in ("2", "0.5", "10", "1", "1", "1"))
    mod2 = D * D + gm * gm
    k1, k2 = N * g * g * D / mod2, N * g * g * gm / mod2
    beta = 2 * g * g * gm * (G1 + G2) / (G1 * G2 * mod2)
    assert s.kappa1 == pytest.approx(float(k1), rel=1e-15)
    assert s.kappa2 == pytest.approx(float(k2), rel=1e-15)
    assert s.beta == pytest.approx(float(beta), rel=1e-15)
    assert s.chi1 == pytest.approx(float(beta * k1), rel=1e-15)
    assert s.chi2 == pytest.approx(float(beta * k2), rel=1e-15)


def test_transparent_drops_absorption_only():
    s = transparent(susceptibilities(MediumParams()))
    assert s.kappa2 == 0 and s.chi2 == 0 and s.kappa1 > 0 and s.chi1 > 0


@pytest.mark.parametrize("bad", [dict(gamma=0), dict(Gamma1=-1), dict(C_out=0),
                                 dict(C_in=-0.1), dict(N=0.5), dict(f1s=1.2),
                                 dict(fc=0), dict(fc=1.5), dict(a0=float("nan"))])
def test_invalid_params_raise(bad):
    with pytest.raises(DomainError):
        MediumParams(**bad)


def test_symmetric_raw_constants_give_equal_gammas():
    G1, G2 = effective_gammas(0.4, 0.4, 1.5, 1.5, 0.7, 0.7)
    assert G1 == G2


def test_no_pumping_uses_plain_rates():
    # Lambda1 + Lambda2 = 0: gamma'_k = gamma_k
    G1, G2 = effective_gammas(0.0, 0.0, 2.0, 2.0, 0.0, 0.0)
    assert G2 == pytest.approx(2.0 + 2.0 * 2.0 / 2.0)
    assert G1 == pytest.approx(G2)


def test_asymmetric_gammas_hand_evaluated():
    # gamma'1 = 0.6, gamma'2 = 0.8
    # Gamma2 = (0.5 + 0.8) + (0.3 + 0.6) (1 + 2) / (1 + 1) = 2.65
    # Gamma1 = (0.3 + 0.6) + (0.5 + 0.8) (1 + 1) / (1 + 2) = 0.9 + 2.6/3
    G1, G2 = effective_gammas(0.3, 0.5, 1.0, 2.0, 0.4, 0.6)
    assert G2 == pytest.approx(2.65, rel=1e-14)
    assert G1 == pytest.approx(0.9 + 2.6 / 3, rel=1e-14)


@given(st.tuples(*[st.floats(0, 10)] * 6))
def test_swap_exchanges_gammas(raw):
    up, down, g1, g2, L1, L2 = raw
    if L1 + L2 + g1 == 0 or L1 + L2 + g2 == 0:
        return
    G1, G2 = effective_gammas(up, down, g1, g2, L1, L2)
    S1, S2 = effective_gammas(down, up, g2, g1, L2, L1)
    assert (S1, S2) == (G2, G1)


def test_effective_gammas_errors():
    with pytest.raises(DomainError):
        effective_gammas(-1, 0, 1, 1, 0, 0)
    with pytest.raises(DomainError):
        effective_gammas(0, 0, 0, 1, 0, 0)


def test_regime_flags():
    p = MediumParams(Delta=100.0)
    r = validate_regime(p, 0.0)
    assert r.ok and not r.hard_failures()
    s = susceptibilities(p)
    assert not validate_regime(p, 0.34 / s.beta, s=s).oscillator
    assert validate_regime(p, 0.34 / s.beta, s=s).hard_failures()
    q = MediumParams(Delta=3.0)
    sq = susceptibilities(q)
    assert not validate_regime(q, 0.05 / sq.beta, s=sq).far_detuned


@given(st.floats(0, 1), st.floats(0, 1))
def test_weak_field_flag_is_monotone(b1, b2):
    p = MediumParams()
    s = susceptibilities(p)
    lo, hi = sorted((b1, b2))
    if not validate_regime(p, lo / s.beta, s=s).weak_field:
        assert not validate_regime(p, hi / s.beta, s=s).weak_field


def test_reduction_tags():
    t = model_reduction_check(MediumParams(Gamma1=2, Gamma2=2, gamma=1, f1s=1))
    assert t.relaxation_ratio == 1 and t.eha_valid
    t = model_reduction_check(MediumParams(Gamma1=1, Gamma2=1, gamma=1, f1s=1, fc=0.5))
    assert t.relaxation_ratio == 0.5 and t.hm_equivalent and not t.eha_valid
    t = model_reduction_check(MediumParams(f1s=0.9))
    assert not t.hm_equivalent
    t = model_reduction_check(MediumParams(f1s=0.05, f2s=0.02))
    assert t.slm_weak_pump


def test_load_params(tmp_path):
    f = tmp_path / "p.toml"
    f.write_text("Delta = 40.0\na0 = 10\n")
    p = load_params(f)
    assert p.Delta == 40.0 and p.a0 == 10.0 and p.gamma == 1.0
    assert load_params(f, a0=3.0).a0 == 3.0
    f.write_text("Delta = 40.0\nbogus = 1\n")
    with pytest.raises(KeyError):
        load_params(f)
    f.write_text("gamma = -1\n")
    with pytest.raises(DomainError):
        load_params(f)


def test_singular_detuning():
    p = MediumParams()
    object.__setattr__(p, "gamma", 0.0)
    object.__setattr__(p, "Delta", 0.0)
    with pytest.raises(DomainError, match="singular detuning"):
        susceptibilities(p)


def test_susceptibility_fields():
    s = Susceptibilities(linear=2 + 1j, cubic=0.2 + 0.1j, beta=0.1)
    assert (s.kappa1, s.kappa2, s.chi1, s.chi2) == (2, 1, 0.2, 0.1)
