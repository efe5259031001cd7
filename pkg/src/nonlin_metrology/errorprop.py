"""Pulling a shift error through the nonlinear encoding."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .generators import Generator, emergent_error, encoding_unitary, wrap_phases
from .hilbert import PureState, ShiftError, SpectrumSet, apply_diagonal, apply_shift

RESIDUAL_TOL = 1e-12


class PullThrough(NamedTuple):
    lhs: PureState
    rhs: PureState
    residual: float


def _distance(a: PureState, b: PureState) -> float:
    return float(np.linalg.norm(a.amplitudes - b.amplitudes))


def pull_through(g: Generator, e: ShiftError, phi: float, psi: PureState) -> PullThrough:
    """Both sides of U(phi) E = V(phi) E U(phi) applied to ``psi``."""
    space = psi.space
    u = encoding_unitary(g, phi, space)
    lhs = apply_diagonal(u, apply_shift(e, psi))
    v = emergent_error(g, e.k, phi, space)
    rhs = apply_diagonal(v, apply_shift(e, apply_diagonal(u, psi)))
    return PullThrough(lhs, rhs, _distance(lhs, rhs))


@dataclass(frozen=True, eq=False)
class SandwichDiagonal:
    """Diagonal of E_k^dagger V_k(phi) E_k.

    ``support`` marks labels that survive the shift; the rest are annihilated.
    """

    space: SpectrumSet
    phases: np.ndarray
    support: np.ndarray

    @property
    def diagonal(self) -> np.ndarray:
        return np.where(self.support, np.exp(1j * self.phases), 0.0)

    @property
    def support_labels(self) -> np.ndarray:
        return self.space.labels[self.support]


def sandwich_diagonal(g: Generator, k: int, phi: float, space: SpectrumSet) -> SandwichDiagonal:
    labels = space.labels
    support = (labels + k >= space.bottom) & (labels + k <= space.top)
    phases = np.zeros(space.dim)
    if np.any(support):
        n = labels[support]
        diff = g.evaluate_ld(n + k) - g.evaluate_ld(n)
        phases[support] = wrap_phases(-np.longdouble(phi) * diff)
    return SandwichDiagonal(space, phases, support)


def interleaved_error(g: Generator, k: int, phi: float, theta: float, psi: PureState) -> PureState:
    """U(theta) E_k U(phi - theta) psi: a shift striking part-way through encoding.

    ``theta`` is the phase still to be imprinted after the error.  The result is
    checked against the factorised form V_k(theta) E_k U(phi) psi.
    """
    if theta != 0 and (np.sign(theta) != np.sign(phi) or abs(theta) > abs(phi)):
        raise ValueError(f"theta={theta!r} must lie between 0 and phi={phi!r}")
    space = psi.space
    e = ShiftError(k)
    out = apply_diagonal(
        encoding_unitary(g, theta, space),
        apply_shift(e, apply_diagonal(encoding_unitary(g, phi - theta, space), psi)),
    )
    factored = apply_diagonal(
        emergent_error(g, k, theta, space),
        apply_shift(e, apply_diagonal(encoding_unitary(g, phi, space), psi)),
    )
    residual = _distance(out, factored)
    if residual > RESIDUAL_TOL:
        raise ArithmeticError(f"interleaved factorisation residual {residual:.3e} exceeds {RESIDUAL_TOL}")
    return out


def emergent_error_is_phi_rot_free(g: Generator, k: int, phi: float, psi: PureState, phi_rots) -> float:
    """Max residual when one V_k(phi) (built without Phi) serves every Phi in ``phi_rots``."""
    space = psi.space
    v = emergent_error(g, k, phi, space)
    u = encoding_unitary(g, phi, space)
    worst = 0.0
    for rot in phi_rots:
        e = ShiftError(k, rot)
        lhs = apply_diagonal(u, apply_shift(e, psi))
        rhs = apply_diagonal(v, apply_shift(e, apply_diagonal(u, psi)))
        worst = max(worst, _distance(lhs, rhs))
    return worst
