"""Fidelity figures of merit for the emergent phase error."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .exceptions import PrecisionError, SupportError
from .generators import Generator, abs_shift_differences, emergent_error, encoding_unitary
from .hilbert import (
    PureState,
    ShiftError,
    SpectrumSet,
    apply_diagonal,
    apply_shift,
    haar_samples,
    inner,
)

NORM_TOL = 1e-10
SUPPORT_TOL = 1e-12
EPSILON_CAP = 0.25


def _require_normalized(psi: PureState, what: str):
    if not psi.is_normalized(NORM_TOL):
        raise ValueError(f"{what} needs a unit-norm state, got norm^2 = {psi.norm2!r}")


def require_support(k: int, psi: PureState) -> PureState:
    """Return E_k psi, raising SupportError if the shift lost any norm."""
    shifted = apply_shift(ShiftError(k), psi)
    deficit = psi.norm2 - shifted.norm2
    if deficit > SUPPORT_TOL:
        raise SupportError(
            f"shift by k={k} moves {deficit:.3e} of the norm out of {psi.space}", deficit=deficit
        )
    return shifted


def diagonal_fidelity(diagonal: np.ndarray, psi: PureState) -> float:
    """|<psi|W|psi>|^2 for a diagonal operator W."""
    value = abs(np.dot(psi.probabilities, diagonal)) ** 2
    return float(min(value, 1.0))


def emergent_fidelity(g: Generator, k: int, phi: float, psi: PureState) -> float:
    _require_normalized(psi, "emergent_fidelity")
    return diagonal_fidelity(emergent_error(g, k, phi, psi.space).diagonal, psi)


# -- closed forms for common probe families -----------------------------------


@dataclass(frozen=True)
class ZeroN:
    """(|0> + |N>)/sqrt(2)."""

    n: int


@dataclass(frozen=True)
class Coherent:
    alpha: complex


@dataclass(frozen=True)
class Cat:
    """|0> + |alpha>, normalised."""

    alpha: complex


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    if alpha == 0:
        return (n == 0).astype(complex)
    log_mag = -abs(alpha) ** 2 / 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1.0)
    return np.exp(log_mag) * np.exp(1j * np.angle(alpha) * n)


def _poisson_weights(alpha: complex, cutoff: int) -> np.ndarray:
    mean = abs(alpha) ** 2
    tail = stats.poisson.sf(cutoff, mean) if mean > 0 else 0.0
    if tail > 1e-10:
        raise PrecisionError(f"cutoff {cutoff} leaves {tail:.2e} of |alpha|^2={mean} outside the truncation")
    return np.abs(coherent_amplitudes(alpha, cutoff)) ** 2


def closed_form_fidelity(family, g: Generator, k: int, phi: float, cutoff: int) -> float:
    """Closed-form emergent-error fidelity for 0-N, coherent and cat probes.

    The phase on label n is -phi * (g(n + k) - g(n)).  For the cat state the
    result is normalised by the state's norm.
    """
    if isinstance(family, ZeroN):
        if family.n > cutoff:
            raise PrecisionError(f"N={family.n} lies above the cutoff {cutoff}")
        d0 = g(0 + k) - g(0)
        dn = g(family.n + k) - g(family.n)
        return 0.5 * (math.cos(phi * (dn - d0)) + 1.0)
    if isinstance(family, (Coherent, Cat)):
        p = _poisson_weights(family.alpha, cutoff)
        n = np.arange(cutoff + 1)
        v = np.exp(-1j * phi * (g(n + k) - g(n)))
        coherent_part = np.dot(p, v)
        if isinstance(family, Coherent):
            return float(min(abs(coherent_part) ** 2, 1.0))
        overlap = math.exp(-abs(family.alpha) ** 2 / 2)
        raw = coherent_part + v[0] * (1 + 2 * overlap)
        norm2 = 2 + 2 * overlap
        return float(min(abs(raw) ** 2 / norm2**2, 1.0))
    raise TypeError(f"unknown probe family {family!r}")


def zero_n_table_value(g: Generator, n: int, k: int, phi: float) -> float:
    """The 0-N table entry exactly as printed: 1/2 (cos[phi (g(N+k) - g(N) - g(k))] + 1)."""
    return 0.5 * (math.cos(phi * (g(n + k) - g(n) - g(k))) + 1.0)


# -- Haar averages ------------------------------------------------------------


def average_fidelity_phases(g: Generator, k: float, phi: float, dim: int) -> np.ndarray:
    """Per-label phases of the averaged error: -phi * sign(k) * (g(n + |k|) - g(n)), n = 0..dim-1."""
    sign, diffs = abs_shift_differences(g, k, np.arange(dim))
    return -phi * sign * diffs


def haar_average_from_trace(trace: complex, dim: int) -> float:
    return (dim + abs(trace) ** 2) / (dim * (dim + 1))


def average_fidelity(g: Generator, k: float, phi: float, dim: int) -> float:
    """Haar average of |<psi|V|psi>|^2 over a ``dim``-level space: (d + |tr V|^2) / (d (d + 1))."""
    if dim < 2:
        raise ValueError(f"average fidelity needs dim >= 2, got {dim}")
    if g.is_linear or k == 0 or phi == 0:
        return 1.0
    trace = np.sum(np.exp(1j * average_fidelity_phases(g, k, phi, dim)))
    return float(min(haar_average_from_trace(trace, dim), 1.0))


class MonteCarloEstimate(NamedTuple):
    mean: float
    stderr: float


def monte_carlo_average_fidelity(
    g: Generator, k: int, phi: float, space: SpectrumSet, samples: int, seed, chunk: int = 20000
) -> MonteCarloEstimate:
    """Sample mean of |<psi|V|psi>|^2 over Haar-random psi.

    V carries the same per-label phases as :func:`average_fidelity` on a space
    of the same dimension, so the two can be compared directly.
    """
    if samples < 1000:
        raise ValueError(f"need at least 1000 samples, got {samples}")
    phases = average_fidelity_phases(g, k, phi, space.dim)
    if np.ptp(phases) == 0:
        return MonteCarloEstimate(1.0, 0.0)
    diag = np.exp(1j * phases)
    rng = np.random.default_rng(seed)
    values = []
    left = samples
    while left:
        batch = min(chunk, left)
        states = haar_samples(space.dim, batch, rng)
        values.append(np.abs((np.abs(states) ** 2) @ diag) ** 2)
        left -= batch
    values = np.concatenate(values)
    return MonteCarloEstimate(float(values.mean()), float(values.std(ddof=1) / math.sqrt(samples)))


# -- critical phase -----------------------------------------------------------


@dataclass(frozen=True)
class CriticalPhaseReport:
    k: int
    epsilon: float
    bound_phi: float
    max_delta: float
    support_ok: Optional[bool] = None

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.bound_phi)


def max_shift_difference(g: Generator, k: float, window_top: int) -> float:
    n = np.arange(window_top + 1, dtype=float)
    ok = g.in_domain(n) & g.in_domain(n + k)
    if not np.any(ok):
        raise ValueError(f"no label in 0..{window_top} where g(n) and g(n+{k}) are both defined")
    return float(np.max(np.abs(g(n[ok] + k) - g(n[ok]))))


def critical_phase_bound(
    g: Generator, k: int, epsilon: float, window_top: int, psi: Optional[PureState] = None
) -> CriticalPhaseReport:
    """sqrt(eps) / max_{n <= window_top} |g(n + k) - g(n)|; +inf when the difference vanishes."""
    if not 0 < epsilon <= EPSILON_CAP:
        raise ValueError(f"epsilon must lie in (0, {EPSILON_CAP}], got {epsilon!r}")
    max_delta = max_shift_difference(g, k, window_top)
    bound = math.inf if max_delta == 0 else math.sqrt(epsilon) / max_delta
    support_ok = None
    if psi is not None:
        shifted = apply_shift(ShiftError(k), psi)
        support_ok = bool(psi.norm2 - shifted.norm2 <= SUPPORT_TOL)
    return CriticalPhaseReport(k, epsilon, bound, max_delta, support_ok)


def overlap_before_after(g: Generator, k: int, phi: float, psi: PureState) -> float:
    """|<Psi|Upsilon>|^2 with Psi = E_k U psi (error after) and Upsilon = U E_k psi (error before)."""
    _require_normalized(psi, "overlap_before_after")
    shifted = require_support(k, psi)
    u = encoding_unitary(g, phi, psi.space)
    after = apply_shift(ShiftError(k), apply_diagonal(u, psi))
    before = apply_diagonal(u, shifted)
    return float(min(abs(inner(after, before)) ** 2, 1.0))


def surviving_labels(space: SpectrumSet, k: int) -> np.ndarray:
    """Labels n whose image n + k stays inside the space."""
    labels = space.labels
    return labels[(labels + k >= space.bottom) & (labels + k <= space.top)]


def haar_states_surviving_shift(space: SpectrumSet, k: int, count: int, seed) -> list:
    """Haar states restricted to the labels a shift by k keeps inside the space."""
    labels = surviving_labels(space, k)
    rows = haar_samples(len(labels), count, seed)
    start = space.index(labels[0]) if len(labels) else 0
    states = []
    for row in rows:
        amps = np.zeros(space.dim, dtype=complex)
        amps[start : start + len(labels)] = row
        states.append(PureState(space, amps))
    return states


# -- crossover ----------------------------------------------------------------


class CrossoverPhase(NamedTuple):
    numeric: float
    printed_formula: float
    series_formula: float


def pairwise_spread(g: Generator, k: float, dim: int) -> float:
    """sum_{n,m} (Delta_k(n) - Delta_k(m))^2 over n, m = 0..dim-1."""
    _, diffs = abs_shift_differences(g, k, np.arange(dim))
    centred = diffs - diffs.mean()
    return float(2 * dim * np.sum(centred**2))


def crossover_phase(g: Generator, k: float, dim: int, epsilon: float, rtol: float = 1e-10) -> CrossoverPhase:
    """Smallest phase where the Haar-averaged fidelity falls to 1 - epsilon.

    Also returns two closed-form estimates for comparison: the printed
    ``2 sqrt(eps) / S`` and the second-order expansion
    ``sqrt(2 eps d (d + 1) / S)`` with S the pairwise spread of Delta_k.
    """
    if not 1 / dim < epsilon < 1:
        raise ValueError(f"epsilon must lie in (1/dim, 1) = ({1 / dim:.4g}, 1), got {epsilon!r}")
    spread = pairwise_spread(g, k, dim)
    if spread == 0:
        return CrossoverPhase(math.inf, math.inf, math.inf)
    printed = 2 * math.sqrt(epsilon) / spread
    series = math.sqrt(2 * epsilon * dim * (dim + 1) / spread)
    target = 1 - epsilon

    def excess(phi):
        return average_fidelity(g, k, phi, dim) - target

    hi = series / 4
    lo = 0.0
    for _ in range(200):
        if excess(hi) < 0:
            break
        lo, hi = hi, 2 * hi
    else:
        return CrossoverPhase(math.inf, printed, series)
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if excess(mid) < 0:
            hi = mid
        else:
            lo = mid
    return CrossoverPhase(0.5 * (lo + hi), printed, series)
