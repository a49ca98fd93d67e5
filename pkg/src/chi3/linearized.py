"""Linearized intensity/phase fluctuations and homodyne noise spectra.

Fluctuations ``(eps, psi)`` of intensity and phase around the semiclassical
steady state obey a two-dimensional Ornstein-Uhlenbeck process

    d/dt (eps, psi) = [[-A, A12], [A21, -A]] (eps, psi) + noise,

with noise covariance ``[[D_ee, D_ep], [D_ep, D_pp]]`` per unit time.  The
three medium models (effective Hamiltonian ``eha``, Haken ``hm`` and
Scully-Lamb ``slm``) differ only in these six numbers.

Spectra ``g`` are normally ordered and shot-noise relative: the measured
photocurrent noise is ``1 + eta * g``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StabilityError
from .params import MediumParams, Susceptibilities
from .semiclassical import effective_dispersion

MODELS = ("eha", "hm", "slm")
U_MIN = 1e-12

# Numeric constants of the linearized drift/diffusion.  Kept in one table so
# the consistency checks can be exercised against a corrupted copy.
DRIFT_COEFFS = {
    "A12_chi": 2.0,      # A12 = 2 chi1 U^2 - 2 U kappa1
    "A12_kappa": -2.0,
    "A21_chi": -1.5,     # A21 = -3/2 chi1 + kappa1 / (2U)
    "A21_kappa": 0.5,
    "Dpp_slm": 0.5,      # D_pp = x chi1 / 2 (Scully-Lamb only)
}


class Branch(enum.Enum):
    """Sign branch of the optimal-phase spectrum."""

    MINUS = -1   # minimizing local-oscillator phase
    PLUS = 1     # conjugate, maximizing phase


def _model(model: str) -> str:
    m = model.lower()
    if m == "lsm":
        m = "slm"
    if m not in MODELS:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    return m


@dataclass(frozen=True)
class DriftDiffusion:
    A: float
    A12: float
    A21: float
    D_ee: float = 0.0
    D_ep: float = 0.0
    D_pp: float = 0.0
    model: str = ""

    @property
    def drift(self) -> np.ndarray:
        return np.array([[-self.A, self.A12], [self.A21, -self.A]])

    @property
    def diffusion(self) -> np.ndarray:
        return np.array([[self.D_ee, self.D_ep], [self.D_ep, self.D_pp]])

    @property
    def eigenvalues(self) -> np.ndarray:
        r = np.sqrt(complex(self.A12 * self.A21))
        return np.array([-self.A + r, -self.A - r])

    @property
    def is_stable(self) -> bool:
        return bool(np.all(self.eigenvalues.real < 0))

    def entries(self) -> tuple:
        return (self.A, self.A12, self.A21, self.D_ee, self.D_ep, self.D_pp)


@dataclass(frozen=True)
class Table2Coeffs:
    """Coefficients of the scaled spectrum
    ``4/(1+eps) (W t^2 + V wbar^2) / ((wbar^2 + 1 - t^2)^2 + 4 t^2)``
    for the amplitude (``0``) and phase (``pi2``) quadratures.

    ``t`` is the dispersion ratio ``kappa1 / A`` for Haken and Scully-Lamb
    but ``sqrt(3) k U / A`` for the effective-Hamiltonian model; the two
    readings are exposed separately as :attr:`t_disp` and :attr:`t_eha`.
    """

    W0: float
    V0: float
    Wpi2: float
    Vpi2: float
    t: float
    model: str = ""

    @property
    def t_disp(self) -> float | None:
        return None if self.model == "eha" else self.t

    @property
    def t_eha(self) -> float | None:
        return self.t if self.model == "eha" else None


@dataclass(frozen=True)
class SpectrumSeries:
    omega_bar: np.ndarray        # frequency grid in units of freq_unit
    values: np.ndarray
    model: str = ""
    theta: float = float("nan")  # local-oscillator phase relative to phi0
    convention: str = "normally ordered, shot-noise relative"
    stderr: np.ndarray | None = None
    freq_unit: float = 1.0       # omega = omega_bar * freq_unit

    def __post_init__(self):
        w = np.asarray(self.omega_bar, dtype=float)
        if w.ndim != 1 or (w.size > 1 and np.any(np.diff(w) <= 0)):
            raise ValueError("omega_bar must be a strictly increasing 1-D grid")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("spectrum values must be finite")

    @property
    def omega(self) -> np.ndarray:
        return np.asarray(self.omega_bar) * self.freq_unit


def drift_diffusion(model: str, p: MediumParams, s: Susceptibilities, U: float, *,
                    k: float | None = None, weak_field: bool = False) -> DriftDiffusion:
    """Drift and diffusion entries of the linearized fluctuations.

    ``k`` is the effective-Hamiltonian coupling (default: the real part of
    the cubic susceptibility, i.e. the effective ``chi1``).  ``weak_field``
    keeps only the linear-dispersion part of the Haken / Scully-Lamb drift,
    ``A12 = -2 U kappa1`` and ``A21 = kappa1 / (2U)``, which is the form the
    scaled spectra assume.
    """
    m = _model(model)
    A = 0.5 * p.C
    kappa1, chi1 = effective_dispersion(p, s)
    if U < 0:
        raise DomainError("intensity U must be non-negative")
    c = DRIFT_COEFFS
    if m == "eha":
        if k is None:
            k = chi1
        # same operation order as below so kappa1 = 0 reproduces HM bitwise
        return DriftDiffusion(A=A, A12=c["A12_chi"] * k * U ** 2,
                              A21=c["A21_chi"] * k, D_ep=-k * U * 1.0,
                              D_pp=0.0, model=m)
    if U <= U_MIN:
        raise DomainError(f"linearization needs U > {U_MIN:g} (A21 ~ kappa1/U)")
    if weak_field:
        A12 = c["A12_kappa"] * U * kappa1
        A21 = c["A21_kappa"] * kappa1 / U
    else:
        A12 = c["A12_chi"] * chi1 * U ** 2 + c["A12_kappa"] * U * kappa1
        A21 = c["A21_chi"] * chi1 + c["A21_kappa"] * kappa1 / U
    if m == "hm":
        return DriftDiffusion(A=A, A12=A12, A21=A21, D_ep=-chi1 * U * p.fc,
                              D_pp=0.0, model=m)
    return DriftDiffusion(A=A, A12=A12, A21=A21, D_ep=-chi1 * U * 1.0,
                          D_pp=c["Dpp_slm"] * p.x * chi1, model=m)


def quadrature_weights(U: float, phi0: float, Theta: float) -> np.ndarray:
    """Weights of ``(eps, psi)`` in the quadrature fluctuation
    ``X = cos(Theta - phi0) eps / sqrt(U) + 2 sqrt(U) sin(Theta - phi0) psi``."""
    th = Theta - phi0
    return np.array([math.cos(th) / math.sqrt(U), 2 * math.sqrt(U) * math.sin(th)])


def spectrum_g_raw(dd: DriftDiffusion, U: float, phi0: float, C_out: float,
                   omega, Theta: float):
    """Closed-form homodyne spectrum g(omega, Theta) of the linearized model.

    ``omega`` is in rad/s.  Uses ``mu = sqrt(2U) sin(Theta - phi0)``,
    ``nu = cos(Theta - phi0) / sqrt(2U)`` and the roots ``S1, S2`` of
    ``(S + A)^2 = A12 A21``.
    """
    if not dd.is_stable:
        raise StabilityError("fluctuations not stationary: drift has eigenvalues "
                             f"{dd.eigenvalues}")
    w = np.asarray(omega, dtype=float)
    w2 = w * w
    th = Theta - phi0
    mu = math.sqrt(2 * U) * math.sin(th)
    nu = math.cos(th) / math.sqrt(2 * U)
    A, A12, A21 = dd.A, dd.A12, dd.A21
    r = np.sqrt(complex(A12 * A21))
    S1, S2 = -A + r, -A - r
    den = ((w2 + S1 ** 2) * (w2 + S2 ** 2)).real
    a_psi = mu * A + nu * A12
    a_eps = mu * A21 + nu * A
    num = (dd.D_pp * (a_psi ** 2 + mu ** 2 * w2)
           + 2 * dd.D_ep * (a_psi * a_eps + mu * nu * w2)
           + dd.D_ee * (a_eps ** 2 + nu ** 2 * w2))
    return 2 * C_out * num / den


def table2_coeffs(model: str, p: MediumParams, s: Susceptibilities, U: float, *,
                  k: float | None = None) -> Table2Coeffs:
    """Scaled-spectrum coefficients for the amplitude and phase quadratures."""
    m = _model(model)
    A = 0.5 * p.C
    kappa1, chi1 = effective_dispersion(p, s)
    bU = s.beta * U
    if m == "eha":
        if k is None:
            k = chi1
        return Table2Coeffs(W0=-2 / 3, V0=0.0, Wpi2=2.0, Vpi2=0.0,
                            t=math.sqrt(3) * k * U / A, model=m)
    t = kappa1 / A
    if m == "hm":
        return Table2Coeffs(W0=2 * bU * p.fc, V0=0.0, Wpi2=-2 * bU * p.fc,
                            Vpi2=0.0, t=t, model=m)
    if t == 0:
        raise DomainError("Scully-Lamb phase coefficient needs t != 0")
    x = p.x
    return Table2Coeffs(W0=2 * bU * (1 + x * t / 2), V0=0.0,
                        Wpi2=-2 * bU * (1 - x / (2 * t)), Vpi2=bU * x * t,
                        t=t, model=m)


def _dbar(t, omega_bar):
    w2 = np.asarray(omega_bar, dtype=float) ** 2
    return (w2 + 1 - t * t) ** 2 + 4 * t * t


def spectrum_scaled(coeffs: Table2Coeffs, eps: float, omega_bar,
                    which: str = "amplitude"):
    """Scaled spectrum at ``Theta = phi0`` (amplitude) or
    ``Theta = phi0 + pi/2`` (phase); ``omega_bar = omega / A``."""
    if which == "amplitude":
        W, V = coeffs.W0, coeffs.V0
    elif which == "phase":
        W, V = coeffs.Wpi2, coeffs.Vpi2
    else:
        raise ValueError(f"which must be 'amplitude' or 'phase', not {which!r}")
    t = coeffs.t
    wb2 = np.asarray(omega_bar, dtype=float) ** 2
    return 4 / (1 + eps) * (W * t * t + V * wb2) / _dbar(t, omega_bar)


@dataclass(frozen=True)
class OptimalPhase:
    theta0: float      # minimizing local-oscillator phase (absolute)
    g_min: float
    g_max: float
    degenerate: bool   # noise independent of Theta


def optimal_phase(model: str, p: MediumParams, s: Susceptibilities, U: float,
                  omega: float, *, phi0: float = 0.0, k: float | None = None,
                  weak_field: bool = False, tol: float = 1e-14) -> OptimalPhase:
    """Local-oscillator phase minimizing g at frequency ``omega`` (rad/s).

    g is sampled at ``Theta - phi0`` in {0, pi/4, pi/2} and written as
    ``a + B sin 2Theta + Cc cos 2Theta``; the minimum sits where
    ``tan 2Theta0 = B / Cc`` on the branch with ``B sin + Cc cos < 0``.
    The conjugate phase ``theta0 + pi/2`` maximizes g.
    """
    dd = drift_diffusion(model, p, s, U, k=k, weak_field=weak_field)
    g = [float(spectrum_g_raw(dd, U, 0.0, p.C_out, omega, th))
         for th in (0.0, math.pi / 4, math.pi / 2)]
    a = 0.5 * (g[0] + g[2])
    Cc = 0.5 * (g[0] - g[2])
    B = g[1] - a
    amp = math.hypot(B, Cc)
    if amp <= tol * max(1.0, abs(a)):
        return OptimalPhase(theta0=phi0, g_min=a, g_max=a, degenerate=True)
    rel = 0.5 * math.atan2(-B, -Cc) % math.pi
    return OptimalPhase(theta0=phi0 + rel, g_min=a - amp, g_max=a + amp,
                        degenerate=False)


def printed_M(t, omega_bar):
    """``M = [((1 + wbar^2 + t^2)^2 + t^2 (1 + t^2 - wbar^2)^2) / (1 + t^2)]^(1/2)``.

    Algebraically equal to ``sqrt((wbar^2 + 1 - t^2)^2 + 4 t^2)``.
    """
    w2 = np.asarray(omega_bar, dtype=float) ** 2
    t2 = t * t
    return np.sqrt(((1 + w2 + t2) ** 2 + t2 * (1 + t2 - w2) ** 2) / (1 + t2))


def optimal_G(model: str, coeffs: Table2Coeffs, omega_bar, *, beta_U: float,
              fc: float = 1.0, x: float = 0.0):
    """Lower and upper envelopes ``(G_minus, G_plus)`` of the optimal-phase
    spectrum ``g(omega, Theta0) = 2/(1+eps) G / ((wbar^2+1-t^2)^2 + 4t^2)``.

    These are the exact extremes over Theta of the scaled (weak-field)
    spectra described by ``coeffs``.
    """
    m = _model(model)
    t = coeffs.t
    w2 = np.asarray(omega_bar, dtype=float) ** 2
    M = printed_M(t, omega_bar)
    if m == "eha":
        centre = 4 * t * t / 3 + 0 * w2
        half = 2 * abs(t) / 3 * np.sqrt(16 * t * t + 3 * (1 - t * t + w2) ** 2)
    elif m == "hm":
        centre = 0 * w2
        half = 2 * fc * abs(beta_U * t) * M
    else:
        centre = beta_U * t * x * (1 + w2 + t * t)
        half = abs(beta_U * t) * M * math.sqrt(x * x + 4)
    return centre - half, centre + half


def spectrum_optimal(model: str, p: MediumParams, s: Susceptibilities, U: float,
                     eps: float, omega_bar, *, k: float | None = None,
                     branch: Branch | None = None):
    """Optimal-phase spectra ``(g_minus, g_plus)``: the minimum and maximum of
    the scaled spectrum over the local-oscillator phase at each frequency.

    With ``branch`` set, only that branch is returned.
    """
    coeffs = table2_coeffs(model, p, s, U, k=k)
    Gm, Gp = optimal_G(model, coeffs, omega_bar, beta_U=s.beta * U, fc=p.fc, x=p.x)
    d = _dbar(coeffs.t, omega_bar)
    gm, gp = 2 / (1 + eps) * Gm / d, 2 / (1 + eps) * Gp / d
    if branch is None:
        return gm, gp
    return gm if Branch(branch) is Branch.MINUS else gp


def zero_frequency_optimal(model: str, *, beta_U: float, t: float, fc: float = 1.0,
                           x: float = 1.0) -> tuple[float, float]:
    """Closed zero-frequency optimal-phase values (single-ended cavity).

    Haken: ``+-4 fc beta_U |t| / (t^2 + 1)``; Scully-Lamb (large x):
    ``+-(4/x) beta_U t / (t^2 + 1)``.  Equal to :func:`spectrum_optimal` at
    ``omega_bar = 0`` with ``eps = 0`` (Haken exactly, Scully-Lamb to leading
    order in 1/x).
    """
    m = _model(model)
    if m == "hm":
        v = 4 * fc * beta_U * abs(t) / (t * t + 1)
    elif m == "slm":
        v = 4 / x * beta_U * t / (t * t + 1)
    else:
        raise ValueError("zero-frequency closed form exists for hm and slm only")
    return -abs(v), abs(v)


def eha_fixed_phase(t: float) -> float:
    """Local-oscillator phase (relative to phi0) with ``tan = 1/(sqrt(3) t)``."""
    return math.atan2(1.0, math.sqrt(3) * t)


def eha_fixed_phase_spectrum(t: float, omega_bar, C_norm: float = 1.0):
    """Effective-Hamiltonian spectrum at :func:`eha_fixed_phase`:
    ``-8 wbar^2 t^2 / (C_norm (1 + 3 t^2) ((wbar^2+1-t^2)^2 + 4t^2))``.

    ``C_norm = 1 + eps`` reproduces the full normalization; ``C_norm = 1`` is
    the single-ended cavity limit.
    """
    w2 = np.asarray(omega_bar, dtype=float) ** 2
    return -8 * w2 * t * t / (C_norm * (1 + 3 * t * t) * _dbar(t, omega_bar))


def eha_band_minimum(t: float, C_norm: float = 1.0) -> tuple[float, float]:
    """Frequency ``sqrt(1 + t^2)`` of the deepest fixed-phase noise reduction
    and its value ``-2 t^2 / (C_norm (1 + 3 t^2))``."""
    return math.sqrt(1 + t * t), -2 * t * t / (C_norm * (1 + 3 * t * t))


def photocurrent(g, eta: float):
    """Photocurrent noise ``1 + eta g`` in shot-noise units."""
    if not 0 <= eta <= 1:
        raise DomainError("quantum efficiency must lie in [0, 1]")
    return 1 + eta * np.asarray(g)


@dataclass(frozen=True)
class ModelPoint:
    """Everything needed to evaluate one model at its operating point."""

    model: str
    U: float
    phi0: float
    k: float | None
    dd: DriftDiffusion
    coeffs: Table2Coeffs


def operating_point(model: str, p: MediumParams, s: Susceptibilities | None = None,
                    *, weak_field: bool = False) -> ModelPoint:
    """Steady state plus linearization of ``model`` for parameter set ``p``.

    The effective-Hamiltonian model has no linear dispersion and coupling
    ``k = chi1``; the other two use the full cold-medium dispersion.
    """
    from .params import susceptibilities, transparent
    from .semiclassical import steady_state

    m = _model(model)
    if s is None:
        s = susceptibilities(p)
    s = transparent(s)
    if m == "eha":
        k = effective_dispersion(p, s)[1]
        st = steady_state(p, s, kappa=0.0, chi=k)
    else:
        k = None
        st = steady_state(p, s)
    dd = drift_diffusion(m, p, s, st.U, k=k, weak_field=weak_field)
    return ModelPoint(model=m, U=st.U, phi0=st.phi0, k=k, dd=dd,
                      coeffs=table2_coeffs(m, p, s, st.U, k=k))
