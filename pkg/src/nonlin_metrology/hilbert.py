"""Truncated Hilbert spaces, states and the shift-error basis.

Every space is a finite run of consecutive integer labels.  Shift errors that
push amplitude past either end of the run delete it, so shifts are in general
norm-decreasing; states are never silently renormalised.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

BOSONIC = "bosonic"
ROTOR = "rotor"
SPIN = "spin"
KINDS = (BOSONIC, ROTOR, SPIN)

NORM_SLACK = 1e-12


@dataclass(frozen=True)
class SpectrumSet:
    """Labelled discrete basis.

    ``parameter`` is the cutoff D for bosonic spaces (labels 0..D), the
    half-width M for rotors (labels -M..M) and N for spin ensembles (0..N).
    """

    kind: str
    parameter: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown space kind {self.kind!r}; expected one of {KINDS}")
        if int(self.parameter) != self.parameter or self.parameter < 0:
            raise ValueError(f"space parameter must be a nonnegative integer, got {self.parameter!r}")
        object.__setattr__(self, "parameter", int(self.parameter))

    @classmethod
    def bosonic(cls, cutoff: int) -> "SpectrumSet":
        return cls(BOSONIC, cutoff)

    @classmethod
    def rotor(cls, halfwidth: int) -> "SpectrumSet":
        return cls(ROTOR, halfwidth)

    @classmethod
    def spin(cls, n: int) -> "SpectrumSet":
        return cls(SPIN, n)

    @property
    def bottom(self) -> int:
        return -self.parameter if self.kind == ROTOR else 0

    @property
    def top(self) -> int:
        return self.parameter

    @property
    def dim(self) -> int:
        return self.top - self.bottom + 1

    @property
    def labels(self) -> np.ndarray:
        return np.arange(self.bottom, self.top + 1)

    def index(self, label: int) -> int:
        if not self.contains(label):
            raise ValueError(f"label {label} not in {self}")
        return int(label) - self.bottom

    def contains(self, label) -> bool:
        return self.bottom <= label <= self.top

    def __str__(self):
        return f"{self.kind}:{self.parameter}"

    @classmethod
    def parse(cls, text: str) -> "SpectrumSet":
        """Parse ``"bosonic:30"``, ``"rotor:5"`` or ``"spin:3"``."""
        kind, _, param = text.partition(":")
        if not param:
            raise ValueError(f"space spec {text!r} must look like kind:parameter")
        return cls(kind.strip().lower(), int(param))


def _frozen(array) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PureState:
    space: SpectrumSet
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.shape != (self.space.dim,):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, space {self.space} needs ({self.space.dim},)"
            )
        if _norm2(amps) > 1 + NORM_SLACK:
            raise ValueError(f"state norm^2 {_norm2(amps)!r} exceeds 1")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm2(self) -> float:
        return _norm2(self.amplitudes)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def is_normalized(self, tol: float = 1e-10) -> bool:
        return abs(self.norm2 - 1.0) <= tol

    def amplitude(self, label: int) -> complex:
        return complex(self.amplitudes[self.space.index(label)])

    def support(self, tol: float = 0.0) -> np.ndarray:
        """Labels carrying probability above ``tol``."""
        return self.space.labels[self.probabilities > tol]

    def to_dict(self) -> dict:
        return {
            "kind": self.space.kind,
            "parameter": self.space.parameter,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "PureState":
        space = SpectrumSet(data["kind"], data["parameter"])
        amps = np.array([complex(re, im) for re, im in data["amplitudes"]])
        return cls(space, amps)

    @classmethod
    def from_json(cls, text: str) -> "PureState":
        return cls.from_dict(json.loads(text))


def _norm2(amps: np.ndarray) -> float:
    return float(np.vdot(amps, amps).real)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    space: SpectrumSet
    matrix: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        if mat.shape != (self.space.dim, self.space.dim):
            raise ValueError(f"matrix shape {mat.shape} does not match space {self.space}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        if self.validate:
            self.check()

    def check(self, herm_tol=1e-10, trace_tol=1e-8, eig_tol=1e-8):
        mat = self.matrix
        if np.max(np.abs(mat - mat.conj().T), initial=0.0) > herm_tol:
            raise ValueError("density matrix is not Hermitian")
        tr = self.trace
        if tr < -trace_tol or tr > 1 + trace_tol:
            raise ValueError(f"density matrix trace {tr} outside [0, 1]")
        if self.min_eigenvalue() < -eig_tol:
            raise ValueError(f"density matrix has negative eigenvalue {self.min_eigenvalue()}")

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    @property
    def populations(self) -> np.ndarray:
        return np.diag(self.matrix).real.copy()

    def expectation(self, psi: PureState) -> float:
        """<psi|rho|psi>, which is the fidelity against a pure state."""
        v = psi.amplitudes
        return float(np.vdot(v, self.matrix @ v).real)

    @classmethod
    def from_pure(cls, psi: PureState) -> "DensityMatrix":
        v = psi.amplitudes
        return cls(psi.space, np.outer(v, v.conj()))


@dataclass(frozen=True)
class ShiftError:
    """Error-basis element: shift by ``k`` with number-dependent rotation ``phi_rot``."""

    k: int
    phi_rot: float = 0.0

    def __post_init__(self):
        if int(self.k) != self.k:
            raise ValueError(f"shift operators need an integer k, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))


@dataclass(frozen=True, eq=False)
class DiagonalPhaseProfile:
    """Diagonal unitary ``diag(exp(i * phases))`` over a space."""

    space: SpectrumSet
    phases: np.ndarray

    def __post_init__(self):
        phases = np.array(self.phases, dtype=float)
        if phases.shape != (self.space.dim,):
            raise ValueError(f"profile length {phases.shape} does not match space {self.space}")
        phases.setflags(write=False)
        object.__setattr__(self, "phases", phases)

    @property
    def diagonal(self) -> np.ndarray:
        return np.exp(1j * self.phases)

    def compose(self, other: "DiagonalPhaseProfile") -> "DiagonalPhaseProfile":
        _same_space(self.space, other.space)
        return DiagonalPhaseProfile(self.space, self.phases + other.phases)


def _same_space(a: SpectrumSet, b: SpectrumSet):
    if a != b:
        raise ValueError(f"space mismatch: {a} vs {b}")


def _shift_vector(amps: np.ndarray, k: int) -> np.ndarray:
    """Move entry i to i+k, dropping whatever falls off either end."""
    out = np.zeros_like(amps)
    dim = amps.shape[-1]
    if abs(k) >= dim:
        return out
    if k >= 0:
        out[..., k:] = amps[..., : dim - k]
    else:
        out[..., : dim + k] = amps[..., -k:]
    return out


def apply_shift(e: ShiftError, psi: PureState) -> PureState:
    labels = psi.space.labels
    amps = psi.amplitudes
    if e.k >= 0:
        out = _shift_vector(amps * np.exp(-1j * e.phi_rot * labels), e.k)
    else:
        out = np.exp(1j * e.phi_rot * labels) * _shift_vector(amps, e.k)
    return PureState(psi.space, out)


def apply_diagonal(d: DiagonalPhaseProfile, psi: PureState) -> PureState:
    _same_space(d.space, psi.space)
    return PureState(psi.space, d.diagonal * psi.amplitudes)


def inner(a: PureState, b: PureState) -> complex:
    _same_space(a.space, b.space)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def basis_state(space: SpectrumSet, label: int) -> PureState:
    amps = np.zeros(space.dim, dtype=complex)
    amps[space.index(label)] = 1.0
    return PureState(space, amps)


def superposition(space: SpectrumSet, labels: Sequence[int], weights=None) -> PureState:
    """Normalised superposition of basis labels, equal weights by default."""
    labels = list(labels)
    if len(set(labels)) != len(labels):
        raise ValueError(f"repeated label in {labels}")
    weights = np.ones(len(labels), dtype=complex) if weights is None else np.asarray(weights, complex)
    amps = np.zeros(space.dim, dtype=complex)
    for label, w in zip(labels, weights):
        amps[space.index(label)] = w
    return PureState(space, amps / np.linalg.norm(amps))


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def haar_samples(dim: int, count: int, seed) -> np.ndarray:
    """``count`` Haar-random unit vectors of length ``dim`` as rows."""
    rng = _rng(seed)
    z = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_sample(space: SpectrumSet, seed) -> PureState:
    """Haar-random pure state; ``seed`` is anything ``default_rng`` accepts."""
    if space.dim < 1:
        raise ValueError("empty space")
    return PureState(space, haar_samples(space.dim, 1, seed)[0])


def embed(space: SpectrumSet, labels: Sequence[int], amplitudes) -> PureState:
    """Place ``amplitudes`` on the given consecutive ``labels`` of ``space``."""
    amps = np.zeros(space.dim, dtype=complex)
    idx = [space.index(n) for n in labels]
    amps[idx] = amplitudes
    return PureState(space, amps)
