"""Photon loss under a nonlinear Hamiltonian, binomial-code recovery, fidelity curves.

The master equation

    drho/dt = -i [omega g(n), rho] + kappa (a rho a^dag - 1/2 {n, rho})

is split elementwise.  Everything except the jump term a rho a^dag is diagonal
in the (m, n) matrix-element basis, with rate

    lam[m, n] = -i omega (g(m) - g(n)) - kappa (m + n) / 2,

and is integrated exactly.  Classic RK4 runs on the jump term in that
interaction frame (integrating-factor RK4), which removes the stiffness of
large omega * g without changing the fixed-step character of the scheme.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import comb

from .exceptions import IntegrationError
from .generators import Generator, PowerLaw, encoding_unitary
from .hilbert import BOSONIC, DensityMatrix, PureState, SpectrumSet, apply_diagonal

TRACE_TOL = 1e-8
EIG_TOL = 1e-8
MIN_STEPS = 100
# Largest |h * frequency| allowed for the oscillating jump coupling.
PHASE_PER_STEP = 0.5


@dataclass(frozen=True)
class LindbladConfig:
    g: Generator
    omega: float
    kappa: float
    t_final: float
    steps: int
    space: SpectrumSet

    def __post_init__(self):
        if self.space.kind != BOSONIC:
            raise ValueError("loss dynamics need a bosonic space")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if self.steps < MIN_STEPS:
            raise ValueError(f"need at least {MIN_STEPS} steps, got {self.steps}")

    @property
    def phi(self) -> float:
        return self.omega * self.t_final


@dataclass
class EvolutionDiagnostics:
    trace_error: float = 0.0
    min_eigenvalue: float = math.inf
    checkpoints: list = field(default_factory=list)


def _rates(config: LindbladConfig) -> np.ndarray:
    n = config.space.labels.astype(float)
    gn = config.g(n)
    return -1j * config.omega * (gn[:, None] - gn[None, :]) - 0.5 * config.kappa * (n[:, None] + n[None, :])


def jump_frequency(g: Generator, omega: float, labels) -> float:
    """Largest |omega (dg(m) - dg(n))| among the given labels, dg(m) = g(m+1) - g(m)."""
    labels = np.asarray(labels, dtype=float)
    if len(labels) < 2:
        return 0.0
    dg = g(labels[1:]) - g(labels[:-1])
    return float(abs(omega) * (dg.max() - dg.min()))


def occupied_labels(rho: DensityMatrix, tol: float = 1e-300) -> np.ndarray:
    """Labels 0..top where top is the highest populated level; loss never moves weight up."""
    pops = rho.populations
    top = int(np.flatnonzero(pops > tol).max(initial=0))
    return rho.space.labels[: top + 1]


def auto_steps(g: Generator, omega: float, t_final: float, labels, min_steps: int = MIN_STEPS) -> int:
    """Step count resolving the fastest oscillation of the interaction-frame jump term."""
    freq = jump_frequency(g, omega, labels)
    return max(min_steps, int(math.ceil(freq * t_final / PHASE_PER_STEP)))


def _jump(rho: np.ndarray, coupling: np.ndarray) -> np.ndarray:
    """kappa a rho a^dag, written elementwise."""
    out = np.zeros_like(rho)
    out[:-1, :-1] = coupling * rho[1:, 1:]
    return out


def evolve_with_diagnostics(
    config: LindbladConfig, rho0: DensityMatrix, checkpoint_every: Optional[int] = None
) -> tuple:
    if rho0.space != config.space:
        raise ValueError(f"initial state lives on {rho0.space}, config on {config.space}")
    n = config.space.labels.astype(float)
    sq = np.sqrt(n[1:])
    coupling = config.kappa * np.outer(sq, sq)
    h = config.t_final / config.steps
    lam = _rates(config)
    full = np.exp(lam * h)
    half = np.exp(lam * h / 2)

    rho = np.array(rho0.matrix, dtype=complex)
    trace0 = float(np.trace(rho).real)
    diag = EvolutionDiagnostics()
    every = checkpoint_every or max(1, config.steps // 20)

    for step in range(1, config.steps + 1):
        k1 = _jump(rho, coupling)
        k2 = _jump(half * (rho + 0.5 * h * k1), coupling)
        k3 = _jump(half * rho + 0.5 * h * k2, coupling)
        k4 = _jump(full * rho + h * half * k3, coupling)
        rho = full * rho + (h / 6) * (full * k1 + 2 * half * (k2 + k3) + k4)
        rho = 0.5 * (rho + rho.conj().T)
        if step % every == 0 or step == config.steps:
            drift = abs(float(np.trace(rho).real) - trace0)
            eig = float(np.linalg.eigvalsh(rho)[0])
            diag.trace_error = max(diag.trace_error, drift)
            diag.min_eigenvalue = min(diag.min_eigenvalue, eig)
            diag.checkpoints.append((step * h, drift, eig))
            if drift > TRACE_TOL:
                raise IntegrationError(
                    f"trace drifted by {drift:.2e} at t={step * h:.4g}; increase steps above {config.steps}"
                )
    if diag.min_eigenvalue < -EIG_TOL:
        raise IntegrationError(f"density matrix lost positivity (min eigenvalue {diag.min_eigenvalue:.2e})")
    return DensityMatrix(config.space, rho), diag


def evolve(config: LindbladConfig, rho0: DensityMatrix) -> DensityMatrix:
    return evolve_with_diagnostics(config, rho0)[0]


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(a.matrix - b.matrix))))


# -- binomial code ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BinomialCode:
    spacing: int
    legs: int
    codeword_minus: PureState
    codeword_plus: PureState

    @property
    def support(self) -> np.ndarray:
        return self.spacing * np.arange(self.legs + 1)


def build_binomial_code(space: SpectrumSet, spacing: int = 3, legs: int = 8) -> BinomialCode:
    """W_pm = 2^(-legs/2) sum_p (pm 1)^p sqrt(C(legs, p)) |spacing p>."""
    if space.kind != BOSONIC:
        raise ValueError("binomial codes live on a bosonic space")
    if space.top < spacing * legs:
        raise ValueError(f"cutoff {space.top} is below the code support top {spacing * legs}")
    p = np.arange(legs + 1)
    weights = np.sqrt(comb(legs, p)) / 2 ** (legs / 2)
    plus = np.zeros(space.dim, dtype=complex)
    minus = np.zeros(space.dim, dtype=complex)
    plus[spacing * p] = weights
    minus[spacing * p] = weights * (-1.0) ** p
    return BinomialCode(spacing, legs, PureState(space, minus), PureState(space, plus))


def no_jump_probability(psi: PureState, kappa_t: float) -> float:
    """<psi| exp(-kappa t n) |psi>: chance that no photon is lost."""
    return float(np.dot(psi.probabilities, np.exp(-kappa_t * psi.space.labels)))


def recover(rho: DensityMatrix, code: BinomialCode) -> DensityMatrix:
    """Measure n mod spacing and shift each syndrome sector back up to a multiple of spacing.

    Phases are left alone; amplitude pushed past the cutoff by the shift is lost.
    """
    space = rho.space
    labels = space.labels
    mat = rho.matrix
    out = np.zeros_like(mat)
    s = code.spacing
    for syndrome in range(s):
        idx = np.flatnonzero(labels % s == syndrome)
        shift = (s - syndrome) % s
        keep = idx[idx + shift <= space.top - space.bottom]
        out[np.ix_(keep + shift, keep + shift)] += mat[np.ix_(keep, keep)]
    return DensityMatrix(space, out)


# -- fidelity curves ----------------------------------------------------------


def _threads() -> int:
    import os

    value = os.environ.get("NONLIN_THREADS")
    return max(1, int(value)) if value else min(8, os.cpu_count() or 1)


def lossless_state(g: Generator, phi: float, psi: PureState) -> PureState:
    return apply_diagonal(encoding_unitary(g, phi, psi.space), psi)


def recovered_point(g: Generator, omega: float, kappa: float, t: float, code: BinomialCode, steps=None) -> dict:
    psi0 = code.codeword_minus
    space = psi0.space
    rho0 = DensityMatrix.from_pure(psi0)
    n_steps = steps or auto_steps(g, omega, t, occupied_labels(rho0))
    config = LindbladConfig(g, omega, kappa, t, n_steps, space)
    rho, diag = evolve_with_diagnostics(config, rho0)
    target = lossless_state(g, omega * t, psi0)
    return {
        "phi": omega * t,
        "fidelity_recovered": recover(rho, code).expectation(target),
        "fidelity_unrecovered": rho.expectation(target),
        "trace_error": diag.trace_error,
        "min_eigenvalue": diag.min_eigenvalue,
        "steps": n_steps,
    }


def recovered_fidelity_curve(
    g: Generator, omega_grid: Sequence[float], kappa: float, t: float, code: BinomialCode, threads=None
):
    """Recovered-vs-lossless fidelity over a grid of Hamiltonian prefactors."""
    from .sweeps import ResultTable

    z = g.z if isinstance(g, PowerLaw) else math.nan
    workers = threads or _threads()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda w: recovered_point(g, w, kappa, t, code), omega_grid))
    columns = {
        "phi": [r["phi"] for r in rows],
        "z": [z] * len(rows),
        "kappa": [kappa] * len(rows),
        "fidelity_recovered": [r["fidelity_recovered"] for r in rows],
        "fidelity_unrecovered": [r["fidelity_unrecovered"] for r in rows],
        "trace_error": [r["trace_error"] for r in rows],
        "min_eigenvalue": [r["min_eigenvalue"] for r in rows],
        "steps": [r["steps"] for r in rows],
    }
    return ResultTable(columns, {"generator": g.spec_string(), "kappa": kappa, "t": t})


def interval_corrected_fidelity(
    g: Generator, omega: float, kappa: float, t: float, code: BinomialCode, intervals: int
) -> float:
    """Fidelity when the evolution is cut into ``intervals`` pieces with recovery after each."""
    psi0 = code.codeword_minus
    space = psi0.space
    dt = t / intervals
    rho = DensityMatrix.from_pure(psi0)
    # recovery can lift weight by up to spacing - 1 levels
    labels = space.labels[: int(code.support[-1]) + 1]
    steps = auto_steps(g, omega, dt, labels)
    config = LindbladConfig(g, omega, kappa, dt, steps, space)
    for _ in range(intervals):
        rho = recover(evolve(config, rho), code)
    return rho.expectation(lossless_state(g, omega * t, psi0))
