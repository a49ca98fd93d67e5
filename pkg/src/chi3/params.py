"""Medium and cavity parameters, susceptibilities and regime checks.

Everything downstream takes a :class:`MediumParams` plus the
:class:`Susceptibilities` derived from it.  Rates are angular frequencies
(rad/s); populations, ``fc``, the detuning ratio ``x`` and the saturation
product ``beta * U`` are dimensionless.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .errors import DomainError

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib


@dataclass(frozen=True)
class MediumParams:
    """Atomic, cavity and drive constants.

    The defaults describe a far-detuned (x = 20) cold medium in a symmetric
    cavity with C/2 = 1, linear dispersion kappa1 = 2 and beta*U close to 0.02.
    """

    gamma: float = 1.0          # transverse relaxation
    Gamma1: float = 2.0         # effective level relaxation, lower level
    Gamma2: float = 2.0         # effective level relaxation, upper level
    Delta: float = 20.0         # atomic detuning omega_21 - omega
    g: float = 0.1              # coupling constant
    N: float = 4010.0           # number of atoms
    f1s: float = 1.0            # steady population of level 1
    f2s: float = 0.0            # steady population of level 2
    C_in: float = 1.0           # input-mirror coupling rate
    C_out: float = 1.0          # output-mirror coupling rate
    a0: float = 44.0            # injected amplitude inside the cavity (real)
    omega_offset: float = 0.0   # omega - omega_L
    fc: float = 1.0             # gamma_par / (2 gamma_perp), Haken model

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, complex):
                raise DomainError(f"{f.name} must be real, got {v!r}")
            if not math.isfinite(v):
                raise DomainError(f"{f.name} must be finite, got {v!r}")
        if self.gamma <= 0 or self.Gamma1 <= 0 or self.Gamma2 <= 0:
            raise DomainError("gamma, Gamma1 and Gamma2 must be positive")
        if self.C_in < 0 or self.C_out <= 0:
            raise DomainError("need C_in >= 0 and C_out > 0")
        if self.N < 1:
            raise DomainError("N must be at least 1")
        if not (0 <= self.f1s <= 1 and 0 <= self.f2s <= 1):
            raise DomainError("populations f1s, f2s must lie in [0, 1]")
        if not 0 < self.fc <= 1:
            raise DomainError("fc must lie in (0, 1]")

    @property
    def C(self) -> float:
        """Total cavity decay rate C_in + C_out."""
        return self.C_in + self.C_out

    @property
    def A(self) -> float:
        """Amplitude decay rate C/2."""
        return 0.5 * self.C

    @property
    def eps(self) -> float:
        """Mirror transmission ratio T_in / T_out = C_in / C_out."""
        return self.C_in / self.C_out

    @property
    def x(self) -> float:
        """Detuning in units of the transverse width, Delta / gamma."""
        return self.Delta / self.gamma

    @property
    def delta(self) -> complex:
        return complex(self.gamma, self.Delta)

    def replace(self, **changes) -> "MediumParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Susceptibilities:
    """Linear and cubic susceptibilities with chi3 = beta * chi1."""

    linear: complex
    cubic: complex
    beta: float

    @property
    def kappa1(self) -> float:
        return self.linear.real

    @property
    def kappa2(self) -> float:
        return self.linear.imag

    @property
    def chi1(self) -> float:
        """Real part of the cubic susceptibility (nonlinear dispersion)."""
        return self.cubic.real

    @property
    def chi2(self) -> float:
        """Imaginary part of the cubic susceptibility (nonlinear absorption)."""
        return self.cubic.imag


def susceptibilities(p: MediumParams) -> Susceptibilities:
    """Linear susceptibility N g^2 / (Delta - i gamma), saturation parameter
    and cubic susceptibility beta * chi1."""
    mod2 = p.gamma ** 2 + p.Delta ** 2
    if mod2 == 0:
        raise DomainError("singular detuning: gamma = Delta = 0")
    linear = p.N * p.g ** 2 / complex(p.Delta, -p.gamma)
    beta = (2 * p.g ** 2 * p.gamma * (p.Gamma1 + p.Gamma2)
            / (p.Gamma1 * p.Gamma2 * mod2))
    return Susceptibilities(linear=linear, cubic=beta * linear, beta=beta)


def transparent(s: Susceptibilities) -> Susceptibilities:
    """Cold-transparent reduction: drop the absorptive parts kappa2, chi2."""
    return Susceptibilities(linear=complex(s.kappa1, 0.0),
                            cubic=complex(s.chi1, 0.0), beta=s.beta)


def effective_gammas(gamma_up: float, gamma_down: float, gamma1: float,
                     gamma2: float, Lambda1: float, Lambda2: float
                     ) -> tuple[float, float]:
    """Effective relaxation constants (Gamma1, Gamma2) from the raw rates.

    ``gamma'_k = gamma_k (1 - Lambda_k / (Lambda1 + Lambda2))`` and equals
    ``gamma_k`` when there is no pumping at all (Lambda1 + Lambda2 = 0).
    Gamma1 follows from Gamma2 by exchanging up/down and the labels 1/2.
    """
    raw = (gamma_up, gamma_down, gamma1, gamma2, Lambda1, Lambda2)
    if any(v < 0 for v in raw):
        raise DomainError("raw relaxation constants must be non-negative")

    def upper(up, down, g1, g2, L1, L2):
        Ls = L1 + L2
        if Ls == 0:
            gp1, gp2 = g1, g2
        else:
            gp1, gp2 = g1 * (1 - L1 / Ls), g2 * (1 - L2 / Ls)
        den = Ls + g1
        if den == 0:
            raise DomainError("zero denominator Lambda1 + Lambda2 + gamma1")
        return (down + gp2) + (up + gp1) * (Ls + g2) / den

    G2 = upper(*raw)
    G1 = upper(gamma_down, gamma_up, gamma2, gamma1, Lambda2, Lambda1)
    return G1, G2


@dataclass(frozen=True)
class RegimeReport:
    beta_U: float
    x: float
    weak_field: bool
    far_detuned: bool
    oscillator: bool
    weak_margin: float       # tol_weak - beta*U
    detuning_margin: float   # |x| - tol_x
    oscillator_margin: float  # tol_frac/3 - beta*U

    @property
    def ok(self) -> bool:
        return self.weak_field and self.far_detuned and self.oscillator

    def hard_failures(self) -> list[str]:
        """Violations that no tolerance choice can excuse."""
        out = []
        if self.beta_U >= 1 / 3:
            out.append(f"beta*U = {self.beta_U:.4g} >= 1/3 (no damped oscillator)")
        if abs(self.x) <= 1:
            out.append(f"|x| = {abs(self.x):.4g} <= 1 (medium not far detuned)")
        return out


def validate_regime(p: MediumParams, U: float, *, s: Susceptibilities | None = None,
                    tol_weak: float = 0.1, tol_x: float = 10.0,
                    tol_frac: float = 0.1) -> RegimeReport:
    """Check weak field (beta U < tol_weak), far detuning (|x| > tol_x) and the
    oscillator regime (beta U < tol_frac / 3).  Never raises."""
    if s is None:
        s = susceptibilities(p)
    bU = s.beta * U
    x = p.x
    return RegimeReport(
        beta_U=bU, x=x,
        weak_field=bU < tol_weak,
        far_detuned=abs(x) > tol_x,
        oscillator=bU < tol_frac / 3,
        weak_margin=tol_weak - bU,
        detuning_margin=abs(x) - tol_x,
        oscillator_margin=tol_frac / 3 - bU,
    )


@dataclass(frozen=True)
class ReductionTags:
    relaxation_ratio: float   # Gamma1 Gamma2 / ((Gamma1 + Gamma2) gamma)
    hm_equivalent: bool
    eha_valid: bool
    slm_weak_pump: bool


def model_reduction_check(p: MediumParams, *, tol: float = 1e-9,
                          pump_threshold: float = 0.1) -> ReductionTags:
    """Which reduced models the parameter set supports.

    ``hm_equivalent``: f1s = 1 and the relaxation ratio equals fc.
    ``eha_valid``: f1s = 1 and the relaxation ratio equals one.
    ``slm_weak_pump``: both populations nonzero and below ``pump_threshold``.
    """
    ratio = p.Gamma1 * p.Gamma2 / ((p.Gamma1 + p.Gamma2) * p.gamma)
    ground = abs(p.f1s - 1) <= tol
    return ReductionTags(
        relaxation_ratio=ratio,
        hm_equivalent=ground and abs(ratio - p.fc) <= tol * max(1.0, ratio),
        eha_valid=ground and abs(ratio - 1) <= tol,
        slm_weak_pump=(0 < p.f1s < pump_threshold and 0 < p.f2s < pump_threshold),
    )


def load_params(path: str | Path, **overrides) -> MediumParams:
    """Read a flat TOML key/value file whose keys are MediumParams fields.

    Missing keys keep their defaults; unknown keys raise ``KeyError``.
    """
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    raw.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(MediumParams)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise KeyError(f"unknown parameter keys: {', '.join(unknown)}")
    try:
        return MediumParams(**{k: float(v) for k, v in raw.items()})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(str(exc)) from exc
