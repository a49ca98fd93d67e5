"""Light in an inversion-free medium (equal working-level populations f0).

The field obeys a P-function Fokker-Planck equation with linear drift
``k alpha + a0`` and state-dependent diffusion

    D_aa = 2 alpha^2 Lam_aa,   D_aa* = 2 (b + |alpha|^2 Lam_aas),

whose first and second moments close, so stationary moments and the
homodyne spectrum ``Y(omega, Theta)`` are available in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StabilityError
from .params import MediumParams, Susceptibilities


@dataclass(frozen=True)
class InvFreeCoeffs:
    k: complex
    Lam_aa: complex
    Lam_aas: float
    b: float
    a0: float = 0.0

    def stability_violations(self) -> list[str]:
        out = []
        if not self.k.real < 0:
            out.append(f"Re k < 0 violated (Re k = {self.k.real:.6g})")
        if not (self.k + self.Lam_aas).real < 0:
            out.append("Re(k + Lam_aas) < 0 violated "
                       f"(= {(self.k + self.Lam_aas).real:.6g})")
        if not (self.k + self.Lam_aa).real < 0:
            out.append("Re(k + Lam_aa) < 0 violated "
                       f"(= {(self.k + self.Lam_aa).real:.6g})")
        return out

    def check_stability(self) -> "InvFreeCoeffs":
        bad = self.stability_violations()
        if bad:
            raise StabilityError("; ".join(bad))
        return self

    def langevin(self):
        """Linear SDE in the doubled variables ``(alpha, alpha+)``."""
        from .sde import LinearSDE

        k = complex(self.k)
        lam = complex(self.Lam_aa)
        drift = np.diag([k, k.conjugate()])
        diffusion = np.array([[0, 2 * self.b], [2 * self.b, 0]], dtype=complex)
        mult = np.array([[2 * lam, 2 * self.Lam_aas],
                         [2 * self.Lam_aas, 2 * lam.conjugate()]], dtype=complex)
        return LinearSDE(drift=drift, diffusion=diffusion,
                         drive=np.array([self.a0, self.a0], dtype=complex),
                         labels=("alpha", "alpha+"), multiplicative=mult)


@dataclass(frozen=True)
class SteadyMoments:
    mean_alpha: complex
    mean_alpha2: complex   # <alpha^2>
    mean_n: float          # <|alpha|^2>
    theta: float = 0.0

    @property
    def S(self) -> float:
        """Incoherent part ``<|alpha|^2> - |<alpha>|^2`` (may be negative)."""
        return self.mean_n - abs(self.mean_alpha) ** 2

    @property
    def var_aa(self) -> complex:
        return self.mean_alpha2 - self.mean_alpha ** 2

    @property
    def mu(self) -> complex:
        """Phase-referenced anomalous variance ``exp(-2i Theta)(<a^2> - <a>^2)``."""
        return np.exp(-2j * self.theta) * self.var_aa

    def at(self, theta: float) -> "SteadyMoments":
        return SteadyMoments(self.mean_alpha, self.mean_alpha2, self.mean_n, theta)

    def as_dict(self) -> dict:
        mu = complex(self.mu)
        return {"mean_alpha_re": self.mean_alpha.real,
                "mean_alpha_im": self.mean_alpha.imag,
                "mean_n": self.mean_n, "S": self.S,
                "mu_re": mu.real, "mu_im": mu.imag, "theta": self.theta}


@dataclass(frozen=True)
class ExactFPECoeffs:
    """Derivative coefficients of the fourth-order pseudo-FPE (inspection only).

    Each entry multiplies the named derivative of the named monomial; the
    complex conjugate terms are implied.
    """

    d1_alpha: complex          # d/da  [alpha P]
    d2_alpha2: float           # d2/da2  [alpha^2 P]
    d2_mixed_const: float      # d2/da da*  [P]
    d2_mixed_n: float          # d2/da da*  [|alpha|^2 P]
    d3_alpha: complex          # d3/da* da2  [alpha P]
    d4_const: float            # d4/da2 da*2  [P]
    f0: float


def _f0(p: MediumParams, f0: float | None) -> float:
    if f0 is None:
        if abs(p.f1s - p.f2s) > 1e-12:
            raise DomainError("inversion-free medium needs f1s == f2s")
        f0 = p.f1s
    if not 0 <= f0 <= 1:
        raise DomainError("f0 must lie in [0, 1]")
    return f0


def exact_fpe_coeffs(p: MediumParams, s: Susceptibilities,
                     f0: float | None = None) -> ExactFPECoeffs:
    """Coefficients of the full pseudo-FPE, including its third- and
    fourth-derivative terms.  The second-derivative ``alpha^2`` coefficient is
    kept with the ``chi2^2`` factor in which it is usually quoted."""
    f0 = _f0(p, f0)
    x, k2, c2 = p.x, s.kappa2, s.chi2
    G1, G2 = p.Gamma1, p.Gamma2
    r = (G2 - G1) / (G1 + G2)
    h = 0.5 * f0
    return ExactFPECoeffs(
        d1_alpha=h * c2 * complex(3 + x * x, -2 * x),
        d2_alpha2=-h * c2 ** 2 * (1 + x * x),
        d2_mixed_const=h * (2 * k2 + c2 * (-1 + (2 * f0 * (G2 - G1) - G2) / (G1 + G2))),
        d2_mixed_n=h * c2 * (x * x - 1),
        d3_alpha=h * 2 * c2 * complex(1 - f0 * r, x * (f0 - 1) * r),
        d4_const=h * 2 * c2 * f0 * G1 / (G1 + G2),
        f0=f0,
    )


def approx_fpe_coeffs(p: MediumParams, s: Susceptibilities, f0: float | None = None,
                      *, shifted_resonance: bool = True,
                      check: bool = True) -> InvFreeCoeffs:
    """Second-order FPE of the inversion-free medium in a driven cavity.

    Needs Gamma1 == Gamma2.  ``shifted_resonance`` drives at the dispersively
    shifted mode so ``k`` is real; otherwise ``Im k = f0 chi2 x``.
    """
    if abs(p.Gamma1 - p.Gamma2) > 1e-12 * max(p.Gamma1, p.Gamma2):
        raise DomainError("approximate FPE assumes Gamma1 == Gamma2")
    f0 = _f0(p, f0)
    x, c2 = p.x, s.chi2
    fc2 = f0 * c2
    k = complex(-0.5 * p.C - 0.5 * fc2 * (3 + x * x),
                0.0 if shifted_resonance else fc2 * x)
    c = InvFreeCoeffs(k=k, Lam_aa=complex(-0.5 * fc2 * (1 + x * x), 0.0),
                      Lam_aas=0.5 * fc2 * (x * x - 1),
                      b=f0 * (s.kappa2 - 0.75 * c2), a0=p.a0)
    return c.check_stability() if check else c


def coeffs_from_generation(q0: float, beta: float, C: float, x: float = 0.0,
                           a0: float = 0.0) -> InvFreeCoeffs:
    """Same coefficients parameterized by ``q0 = 2 f0 kappa2 / C`` and beta
    (so ``f0 chi2 = beta C q0 / 2``), with real k."""
    fc2 = 0.5 * beta * C * q0
    return InvFreeCoeffs(k=complex(-0.5 * C - 0.5 * fc2 * (3 + x * x), 0.0),
                         Lam_aa=complex(-0.5 * fc2 * (1 + x * x), 0.0),
                         Lam_aas=0.5 * fc2 * (x * x - 1),
                         b=0.5 * C * q0 * (1 - 0.75 * beta), a0=a0)


def cold_reduction_coeffs(model: str, p: MediumParams,
                          s: Susceptibilities) -> InvFreeCoeffs:
    """Haken / Scully-Lamb equations with nonlinear dispersion dropped from
    the drift (weak field).  Haken uses f1s = 1, x = 0; Scully-Lamb fc = 1."""
    m = model.lower()
    kappa1, chi1 = s.kappa1, s.chi1
    if m == "hm":
        f1, x, fc = 1.0, 0.0, p.fc
    elif m in ("slm", "lsm"):
        f1, x, fc = p.f1s, p.x, 1.0
    else:
        raise ValueError(f"cold reduction defined for hm and slm, not {model!r}")
    return InvFreeCoeffs(k=complex(-0.5 * p.C, kappa1),
                         Lam_aa=complex(chi1 * x / 4, -0.5 * chi1 * fc) * f1,
                         Lam_aas=f1 * x * chi1 / 4, b=0.0, a0=p.a0)


def steady_moments(c: InvFreeCoeffs, Theta: float = 0.0) -> SteadyMoments:
    """Stationary first and second moments."""
    c.check_stability()
    k, lam = complex(c.k), complex(c.Lam_aa)
    kk = 2 * k.real
    mean = -c.a0 / k
    var = -c.a0 ** 2 * lam / (k * k * (k + lam))
    n = (c.a0 ** 2 * kk / abs(k) ** 2 - 2 * c.b) / (kk + 2 * c.Lam_aas)
    return SteadyMoments(mean_alpha=mean, mean_alpha2=var + mean * mean,
                         mean_n=float(n), theta=Theta)


def spectrum_Y(c: InvFreeCoeffs, m: SteadyMoments, omega, Theta: float | None = None):
    """Normally ordered spectrum of ``X = alpha* exp(i Theta) + c.c.``;
    ``omega`` in rad/s.  ``Theta`` defaults to ``m.theta``."""
    if Theta is not None:
        m = m.at(Theta)
    A = -c.k.real
    if A <= 0:
        raise StabilityError("Re k < 0 violated")
    T = c.k.imag / A
    wb2 = (np.asarray(omega, dtype=float) / A) ** 2
    mu = complex(m.mu)
    num = (m.S + mu.real) * (1 + wb2 + T * T) + T * mu.imag * (wb2 - 1 - T * T)
    return 4 / A * num / ((wb2 + 1 - T * T) ** 2 + 4 * T * T)


def resonant_moments(q0: float, beta: float, x: float, a0: float, C: float,
                     Theta: float = 0.0) -> dict:
    """Shifted-resonance moments in the usual simplified form
    (``1 - 3 beta/4 ~ 1`` and a common factor ``R = 1/(1 + 2 beta q0)``).

    Returns a dict with ``mean_alpha``, ``mean_n``, ``S`` and ``mu``; the
    exact values come from :func:`steady_moments`.
    """
    if q0 < 0 or beta < 0:
        raise DomainError("q0 and beta must be non-negative")
    k = -0.5 * C * (1 + 0.5 * beta * q0 * (3 + x * x))
    R = 1 / (1 + 2 * beta * q0)
    r = a0 ** 2 / k ** 2
    return {
        "k": k,
        "mean_alpha": -a0 / k,
        "mean_n": (q0 + r * (1 + 0.5 * beta * q0 * (3 + x * x))) * R,
        "S": (q0 - 0.5 * beta * r * q0 * (1 - x * x)) * R,
        "mu": -0.5 * beta * r * q0 * (1 + x * x) * R * np.exp(-2j * Theta),
    }


@dataclass(frozen=True)
class GenerationStats:
    mean_n: float
    linewidth: float
    mandel_xi: float

    @property
    def mandel_ratio(self):
        """``xi / <n>``; 1 where no light is generated."""
        n = np.asarray(self.mean_n, dtype=float)
        r = np.divide(self.mandel_xi, n, out=np.ones_like(n), where=n != 0)
        return float(r) if r.ndim == 0 else r


def generation_stats(q0, beta, C):
    """Photon number, Lorentzian half-width and Mandel parameter of the light
    generated without drive or detuning.

    ``<n> = q0/(1 + 2 beta q0)``, ``dnu = (C/2)(1 + 3 beta q0 / 2)`` and
    ``xi = <n>(1 - beta <n>)(1 + 2 beta q0)/(1 + 5 beta q0 / 2)``.  Accepts
    arrays; scalars give a :class:`GenerationStats`.
    """
    q0 = np.asarray(q0, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if np.any(q0 < 0) or np.any(beta < 0) or np.any(np.asarray(C) <= 0):
        raise DomainError("need q0 >= 0, beta >= 0, C > 0")
    bq = beta * q0
    n = q0 / (1 + 2 * bq)
    dnu = 0.5 * np.asarray(C) * (1 + 1.5 * bq)
    xi = n * (1 - beta * n) * (1 + 2 * bq) / (1 + 2.5 * bq)
    if n.ndim == 0 and dnu.ndim == 0:
        return GenerationStats(float(n), float(dnu), float(xi))
    return GenerationStats(n, dnu, xi)


def closure_mandel_factor(q0, beta):
    """``xi / <n>^2`` with ``xi = <|alpha|^4> - <|alpha|^2>^2`` from the closed
    fourth moment of the second-order FPE at zero drive and detuning:
    ``(1 + beta q0) / (1 + 3 beta q0)``.

    A Gaussian (thermal) field gives 1.  This is an independent cross-check;
    :func:`generation_stats` keeps its own normalization of ``xi``.
    """
    bq = np.asarray(beta, dtype=float) * np.asarray(q0, dtype=float)
    return (1 + bq) / (1 + 3 * bq)


def half_max_width(c: InvFreeCoeffs, m: SteadyMoments, Theta: float = 0.0) -> float:
    """Half-width at half-maximum of ``Y(omega)`` found by root bracketing."""
    from scipy.optimize import brentq

    y0 = float(spectrum_Y(c, m, 0.0, Theta))
    if y0 == 0:
        raise DomainError("spectrum vanishes at omega = 0")
    f = lambda w: float(spectrum_Y(c, m, w, Theta)) - 0.5 * y0  # noqa: E731
    hi = max(abs(c.k), 1e-300)
    while f(hi) * f(0.0) > 0:
        hi *= 2
        if not math.isfinite(hi):
            raise DomainError("no half-maximum crossing")
    return brentq(f, 0.0, hi, xtol=1e-14 * hi, rtol=1e-15)
