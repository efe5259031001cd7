"""Quantum Fisher information for diagonal generators on pure states."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .generators import Generator, encoding_unitary
from .hilbert import PureState, ShiftError, apply_diagonal, apply_shift
from .metrics import NORM_TOL, critical_phase_bound, require_support

SINGULAR_RTOL = 1e-12
FD_STEP_REL = 1e-6


def _probabilities(psi: PureState, what: str) -> np.ndarray:
    if not psi.is_normalized(NORM_TOL):
        raise ValueError(f"{what} needs a unit-norm state, got norm^2 = {psi.norm2!r}")
    return psi.probabilities


def _variance(p: np.ndarray, a: np.ndarray) -> float:
    if np.ptp(a) == 0:
        return 0.0
    mean = np.dot(p, a)
    return float(max(np.dot(p, (a - mean) ** 2), 0.0))


def _covariance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return float(np.dot(p, (a - np.dot(p, a)) * (b - np.dot(p, b))))


def _on_support(g: Generator, psi: PureState, shift: int = 0) -> tuple:
    """Probabilities and g(n + shift) restricted to labels that carry weight."""
    p = psi.probabilities
    mask = p > 0
    labels = psi.space.labels[mask]
    return p[mask], g(labels + shift)


def qfi_pure(g: Generator, psi: PureState) -> float:
    """4 Var_psi[g(n)]."""
    _probabilities(psi, "qfi_pure")
    p, a = _on_support(g, psi)
    return 4 * _variance(p, a)


def qcrb(qfi: float, trials: int = 1) -> float:
    """Standard-deviation floor 1 / sqrt(trials * qfi); +inf for zero information."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if qfi < 0:
        raise ValueError(f"QFI must be nonnegative, got {qfi}")
    if qfi == 0:
        return math.inf
    return 1 / math.sqrt(trials * qfi)


def qfi_heralded(g: Generator, k: int, psi: PureState) -> float:
    """QFI when the shift k is known: 4 Var_psi[g(n + k)]."""
    _probabilities(psi, "qfi_heralded")
    require_support(k, psi)
    p, a = _on_support(g, psi, shift=k)
    return 4 * _variance(p, a)


@dataclass(frozen=True)
class QfiMatrix:
    i_phiphi: float
    i_phitheta: float
    i_thetatheta: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.i_phiphi, self.i_phitheta], [self.i_phitheta, self.i_thetatheta]])

    def is_psd(self, tol: float = 1e-10) -> bool:
        scale = max(abs(self.i_phiphi), abs(self.i_thetatheta), 1.0)
        return bool(np.linalg.eigvalsh(self.as_array())[0] >= -tol * scale)


class NuisanceQfi(NamedTuple):
    matrix: QfiMatrix
    effective: float
    printed_closed_form: Optional[float]


def two_point_closed_form(g: Generator, k: int, m: int, n: int) -> float:
    """Printed effective-QFI expression for (|M> + |N>)/sqrt(2); nan if its denominator vanishes."""
    gm, gn, gmk, gnk = (float(g(x)) for x in (m, n, m + k, n + k))
    denom = (gnk - gmk) ** 2
    if denom == 0:
        return math.nan
    return (gn - gm) ** 3 / denom * (gn - 2 * gnk - gm + 2 * gmk)


def qfi_nuisance(g: Generator, k: int, psi: PureState) -> NuisanceQfi:
    """QFI matrix for (phi, theta) in V_k(theta) E_k U(phi) psi and the Schur-complement effective QFI."""
    _probabilities(psi, "qfi_nuisance")
    require_support(k, psi)
    p, a = _on_support(g, psi)
    _, a_shifted = _on_support(g, psi, shift=k)
    b = a_shifted - a
    i_pp = 4 * _variance(p, a)
    i_tt = 4 * _variance(p, b)
    i_pt = 4 * _covariance(p, a, b)
    # B constant up to rounding (linear g, k = 0, one-label support) carries no theta information
    scale = max(np.abs(a).max(initial=0.0), np.abs(b).max(initial=0.0), 1e-300)
    constant_b = np.ptp(b) <= SINGULAR_RTOL * scale
    if not constant_b and i_tt > SINGULAR_RTOL * max(i_pp, 1e-300):
        effective = min(max(i_pp - i_pt**2 / i_tt, 0.0), i_pp)
    else:
        effective = i_pp
    closed = None
    support = psi.support()
    if len(support) == 2:
        closed = two_point_closed_form(g, k, int(support[0]), int(support[1]))
    return NuisanceQfi(QfiMatrix(i_pp, i_pt, i_tt), effective, closed)


def qfi_numerical(family: Callable[[float], np.ndarray], phi: float, step: Optional[float] = None) -> float:
    """4 (<d psi|d psi> - |<psi|d psi>|^2) with a central-difference derivative."""
    h = step if step is not None else FD_STEP_REL * max(abs(phi), 1e-3)
    psi = np.asarray(family(phi))
    d = (np.asarray(family(phi + h)) - np.asarray(family(phi - h))) / (2 * h)
    return float(4 * (np.vdot(d, d).real - abs(np.vdot(psi, d)) ** 2))


def error_first_family(g: Generator, k: int, psi: PureState, phi0: float) -> Callable[[float], np.ndarray]:
    """Upsilon(phi) = U(phi) E_k psi, split at phi0 into a phi-carrying part along
    Psi(phi) = E_k U(phi) psi and an orthogonal remainder frozen at phi0."""
    space = psi.space
    e = ShiftError(k)

    def psi_after(phi):
        return apply_shift(e, apply_diagonal(encoding_unitary(g, phi, space), psi)).amplitudes

    upsilon0 = apply_diagonal(encoding_unitary(g, phi0, space), apply_shift(e, psi)).amplitudes
    after0 = psi_after(phi0)
    coeff = np.vdot(after0, upsilon0)
    remainder = upsilon0 - coeff * after0

    def family(phi):
        return coeff * psi_after(phi) + remainder

    return family


def qfi_difference_scaling(g: Generator, k: int, psi: PureState, epsilons) -> list:
    """(epsilon, |I(psi) - I(Upsilon)|) at the critical phase for each epsilon.

    The error-first state is expanded around Psi with the orthogonal component
    treated as carrying no phi dependence; its QFI comes from finite differences.
    """
    _probabilities(psi, "qfi_difference_scaling")
    require_support(k, psi)
    reference = qfi_pure(g, psi)
    top = psi.space.top
    out = []
    for eps in epsilons:
        phi = critical_phase_bound(g, k, eps, top).bound_phi
        if math.isinf(phi):
            out.append((eps, 0.0))
            continue
        family = error_first_family(g, k, psi, phi)
        out.append((eps, abs(reference - qfi_numerical(family, phi, FD_STEP_REL * abs(phi)))))
    return out


def loglog_slope(pairs) -> float:
    """Least-squares slope of log(delta) against log(epsilon)."""
    eps, delta = np.array(pairs, dtype=float).T
    return float(np.polyfit(np.log(eps), np.log(delta), 1)[0])
