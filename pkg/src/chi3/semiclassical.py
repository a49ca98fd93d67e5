"""Mean-field amplitude dynamics of the driven cavity and its steady states."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .params import MediumParams, Susceptibilities


@dataclass(frozen=True)
class SteadyState:
    """Stationary point of the amplitude equation in the drive frame."""

    U: float
    phi0: float
    z: complex
    reachable: bool = True   # branch followed when a0 is ramped up from zero
    stable: bool = True


def effective_dispersion(p: MediumParams, s: Susceptibilities) -> tuple[float, float]:
    """Linear and nonlinear dispersion seen by the field in the drive frame.

    Returns ``((f1s - f2s) kappa1 - (omega - omega_L), (f1s - f2s) chi1)``.
    A drive tuned to the dispersively shifted mode, ``omega_offset = kappa1``
    with f1s = 1, makes the linear term vanish.
    """
    dn = p.f1s - p.f2s
    return dn * s.kappa1 - p.omega_offset, dn * s.chi1


def amplitude_rhs(z, p: MediumParams, s: Susceptibilities, t: float = 0.0,
                  frame: str = "cavity"):
    """Time derivative of the mean intracavity amplitude.

    ``frame="cavity"`` evaluates the equation as written, with drive phase
    factor ``exp(i (omega - omega_L) t)``; ``frame="drive"`` rotates with the
    injected field so the drive is the constant ``a0``.
    """
    z = np.asarray(z, dtype=complex)
    n = np.abs(z) ** 2
    medium = ((1j * s.kappa1 - s.kappa2) * z
              + (-1j * s.chi1 + s.chi2) * z * n) * (p.f1s - p.f2s)
    if frame == "cavity":
        return medium - 0.5 * p.C * z + p.a0 * np.exp(1j * p.omega_offset * t)
    if frame == "drive":
        return medium - 0.5 * p.C * z - 1j * p.omega_offset * z + p.a0
    raise ValueError(f"unknown frame {frame!r}")


def _real_cubic_roots(c3: float, c2: float, c1: float, c0: float) -> list[float]:
    """Real roots of c3 U^3 + c2 U^2 + c1 U + c0 by the trigonometric /
    Cardano closed form, each polished by one Newton step."""
    a, b, c = c2 / c3, c1 / c3, c0 / c3
    p = b - a * a / 3
    q = 2 * a ** 3 / 27 - a * b / 3 + c
    disc = (q / 2) ** 2 + (p / 3) ** 3
    if disc < 0:
        r = 2 * math.sqrt(-p / 3)
        arg = (3 * q / (2 * p)) * math.sqrt(-3 / p)
        th = math.acos(max(-1.0, min(1.0, arg))) / 3
        ys = [r * math.cos(th - 2 * math.pi * k / 3) for k in range(3)]
    else:
        sq = math.sqrt(disc)
        ys = [float(np.cbrt(-q / 2 + sq) + np.cbrt(-q / 2 - sq))]
    roots = []
    for y in ys:
        u = y - a / 3
        f = ((c3 * u + c2) * u + c1) * u + c0
        df = (3 * c3 * u + 2 * c2) * u + c1
        if df != 0:
            u -= f / df
        roots.append(u)
    return sorted(roots)


def _is_stable(z: complex, kappa: float, chi: float, A: float) -> bool:
    U = abs(z) ** 2
    a = 1j * (kappa - 2 * chi * U) - A
    b = -1j * chi * z * z
    J = np.array([[(a + b).real, (1j * (a - b)).real],
                  [(a + b).imag, (1j * (a - b)).imag]])
    return bool(np.all(np.linalg.eigvals(J).real < 0))


def steady_state(p: MediumParams, s: Susceptibilities, *, kappa: float | None = None,
                 chi: float | None = None, all_roots: bool = False):
    """Steady intensity ``U = |z|^2`` and phase of the transparent-medium
    amplitude equation in the drive frame.

    Eliminating the phase gives the cubic
    ``U [ (C/2)^2 + (kappa - chi U)^2 ] = a0^2``.  ``kappa`` and ``chi``
    default to :func:`effective_dispersion`; the effective-Hamiltonian model
    passes ``kappa=0, chi=k``.

    With ``all_roots=True`` every positive root is returned, sorted by U; the
    lowest one is the branch reached by ramping the drive up from zero and is
    flagged ``reachable``.  Otherwise only that branch is returned.
    """
    k_eff, c_eff = effective_dispersion(p, s)
    kappa = k_eff if kappa is None else kappa
    chi = c_eff if chi is None else chi
    A = 0.5 * p.C
    if p.a0 == 0:
        st = SteadyState(U=0.0, phi0=0.0, z=0j)
        return (st,) if all_roots else st

    U_lin = p.a0 ** 2 / (A * A + kappa * kappa)
    if abs(chi) * U_lin <= 1e-12 * (A + abs(kappa)):
        # Kerr shift negligible: the remaining roots sit beyond ~kappa/chi
        # and would overflow the closed form; keep the linear branch only.
        c = [chi * chi, -2 * kappa * chi, A * A + kappa * kappa, -p.a0 ** 2]
        f = ((c[0] * U_lin + c[1]) * U_lin + c[2]) * U_lin + c[3]
        df = (3 * c[0] * U_lin + 2 * c[1]) * U_lin + c[2]
        Us = [U_lin - f / df]
    else:
        Us = _real_cubic_roots(chi * chi, -2 * kappa * chi, A * A + kappa * kappa,
                               -p.a0 ** 2)
    Us = [u for u in Us if u > 0]
    if not Us:
        raise DomainError("no steady state with positive intensity")
    uniq = []
    for u in Us:
        if not uniq or abs(u - uniq[-1]) > 1e-12 * max(1.0, u):
            uniq.append(u)

    states = []
    for i, U in enumerate(uniq):
        z = p.a0 / complex(A, -(kappa - chi * U))
        states.append(SteadyState(U=float(U), phi0=float(np.angle(z)), z=z,
                                  reachable=(i == 0),
                                  stable=_is_stable(z, kappa, chi, A)))
    return tuple(states) if all_roots else states[0]


def power_ratio(t, eps):
    """Transmitted over injected power, ``1/(1+t^2) * 4 eps / (1+eps)^2``,
    with ``t = 2 kappa1 / C`` and ``eps = T_in / T_out``."""
    eps = np.asarray(eps, dtype=float)
    if np.any(eps <= 0):
        raise DomainError("eps must be positive")
    t = np.asarray(t, dtype=float)
    return 1.0 / (1.0 + t * t) * 4 * eps / (1 + eps) ** 2


def oscillation_frequency(dd) -> float:
    """Squared oscillation frequency ``-A12 A21`` of the damped fluctuations.

    Negative values mean the fluctuations relax without oscillating.
    """
    return -dd.A12 * dd.A21
