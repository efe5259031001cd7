"""Nonlinear generators g(n) and the diagonal unitaries they produce.

Phase profiles are accumulated in extended precision and wrapped into
[-pi, pi) before being stored as float64.  Without the wrap, phases such as
phi * n**3 lose several digits and the commutation identities stop holding
at the 1e-12 level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import DomainError
from .hilbert import DiagonalPhaseProfile, SpectrumSet

__all__ = [
    "Generator",
    "Linear",
    "PowerLaw",
    "Plateau",
    "Table",
    "kerr",
    "parse_generator",
    "eval_g",
    "delta_k",
    "encoding_unitary",
    "emergent_error",
    "wrap_phases",
    "DiagonalPhaseProfile",
]

_PI = np.arccos(np.longdouble(-1))
_TWO_PI = 2 * _PI


def wrap_phases(phases) -> np.ndarray:
    """Reduce (extended-precision) phases into [-pi, pi) and return float64."""
    x = np.asarray(phases, dtype=np.longdouble)
    wrapped = x - _TWO_PI * np.floor((x + _PI) / _TWO_PI)
    return wrapped.astype(float)


class Generator:
    """Real function of the number label, evaluated elementwise on arrays."""

    def __call__(self, n):
        x = np.asarray(n, dtype=float)
        ok = self.in_domain(x)
        if not np.all(ok):
            bad = np.atleast_1d(x)[~np.atleast_1d(ok)]
            raise DomainError(f"{self.spec_string()} is undefined at {bad[:5].tolist()}")
        return self._evaluate(x)

    def in_domain(self, x) -> np.ndarray:
        return np.ones(np.shape(x), dtype=bool)

    def _evaluate(self, x):
        raise NotImplementedError

    def evaluate_ld(self, n) -> np.ndarray:
        """Values in extended precision for phase accumulation."""
        return np.asarray(self(n), dtype=np.longdouble)

    def spec_string(self) -> str:
        raise NotImplementedError

    @property
    def is_linear(self) -> bool:
        return False


@dataclass(frozen=True)
class Linear(Generator):
    slope: float = 1.0

    def _evaluate(self, x):
        return self.slope * x

    def spec_string(self):
        return f"linear:{self.slope!r}"

    @property
    def is_linear(self):
        return True


@dataclass(frozen=True)
class PowerLaw(Generator):
    """g(n) = n**z.  Non-integer z is only defined for n >= 0."""

    z: float

    def __post_init__(self):
        if not self.z >= 1:
            raise ValueError(f"power-law exponent must be >= 1, got {self.z!r}")
        object.__setattr__(self, "z", float(self.z))

    @property
    def integer_power(self) -> bool:
        return float(self.z).is_integer()

    def in_domain(self, x):
        x = np.asarray(x, dtype=float)
        if self.integer_power:
            return np.ones(x.shape, dtype=bool)
        return x >= 0

    def _evaluate(self, x):
        if self.integer_power:
            return np.power(x, int(self.z)).astype(float)
        return np.power(x, self.z)

    def evaluate_ld(self, n):
        x = np.asarray(n, dtype=np.longdouble)
        ok = self.in_domain(np.asarray(n, float))
        if not np.all(ok):
            raise DomainError(f"{self.spec_string()} is undefined at negative arguments")
        if self.integer_power:
            return np.power(x, int(self.z))
        return np.power(x, np.longdouble(self.z))

    def spec_string(self):
        if self.z == 2.0:
            return "kerr"
        return f"power:{self.z!r}"

    @property
    def is_linear(self):
        return self.z == 1.0


def kerr() -> PowerLaw:
    return PowerLaw(2.0)


@dataclass(frozen=True)
class Plateau(Generator):
    """Flat steps of width ``mu`` following (floor(n/mu) * mu) ** z."""

    mu: int
    z: int

    def __post_init__(self):
        if int(self.mu) != self.mu or self.mu < 1:
            raise ValueError(f"plateau width must be a positive integer, got {self.mu!r}")
        if int(self.z) != self.z or self.z < 1:
            raise ValueError(f"plateau power must be a positive integer, got {self.z!r}")
        object.__setattr__(self, "mu", int(self.mu))
        object.__setattr__(self, "z", int(self.z))

    def _evaluate(self, x):
        return np.power(np.floor(x / self.mu) * self.mu, self.z)

    def evaluate_ld(self, n):
        x = np.asarray(n, dtype=np.longdouble)
        return np.power(np.floor(x / self.mu) * self.mu, self.z)

    def spec_string(self):
        return f"plateau:{self.mu}:{self.z}"


@dataclass(frozen=True)
class Table(Generator):
    """Explicit values g(0), g(1), ...; anything off the table is an error."""

    values: tuple

    def __post_init__(self):
        if len(self.values) == 0:
            raise ValueError("table generator needs at least one value")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def in_domain(self, x):
        x = np.asarray(x, dtype=float)
        return (x == np.round(x)) & (x >= 0) & (x < len(self.values))

    def _evaluate(self, x):
        table = np.asarray(self.values)
        return table[np.asarray(x, dtype=int)]

    def spec_string(self):
        return "table:" + ",".join(repr(v) for v in self.values)


def parse_generator(text: str) -> Generator:
    """Parse ``linear:1.0``, ``power:2.5``, ``kerr``, ``plateau:4:2`` or ``table:0,1,4,9``."""
    head, _, rest = text.strip().partition(":")
    head = head.lower()
    try:
        if head == "linear":
            return Linear(float(rest) if rest else 1.0)
        if head == "power":
            return PowerLaw(float(rest))
        if head == "kerr" and not rest:
            return kerr()
        if head == "plateau":
            mu, _, z = rest.partition(":")
            return Plateau(int(mu), int(z))
        if head == "table":
            return Table(tuple(float(v) for v in rest.split(",")))
    except ValueError as exc:
        raise ValueError(f"bad generator spec {text!r}: {exc}") from exc
    raise ValueError(f"unknown generator spec {text!r}")


def eval_g(g: Generator, n) -> float:
    return float(g(n))


def delta_k(g: Generator, k: float, n) -> float:
    """g(n + k) - g(n); k may be real for continuation sweeps."""
    return float(g(n + k) - g(n))


def encoding_unitary(g: Generator, phi: float, space: SpectrumSet) -> DiagonalPhaseProfile:
    labels = space.labels
    phases = -np.longdouble(phi) * g.evaluate_ld(labels)
    return DiagonalPhaseProfile(space, wrap_phases(phases))


def emergent_phase_differences(g: Generator, k: int, space: SpectrumSet) -> np.ndarray:
    """g(n) - g(n - k) per label (extended precision), 0 where g(n - k) is undefined."""
    labels = space.labels
    shifted = labels - k
    ok = g.in_domain(shifted.astype(float))
    diff = np.zeros(space.dim, dtype=np.longdouble)
    if np.any(ok):
        diff[ok] = g.evaluate_ld(labels[ok]) - g.evaluate_ld(shifted[ok])
    return diff


def emergent_error(g: Generator, k: int, phi: float, space: SpectrumSet) -> DiagonalPhaseProfile:
    """Diagonal of exp(-i phi [g(n) - g(n - k)]).

    Labels whose partner n - k lies outside g's domain get phase 0; a preceding
    shift by k can never leave amplitude on them.
    """
    if int(k) != k:
        raise ValueError("operator form needs an integer k")
    diff = emergent_phase_differences(g, int(k), space)
    return DiagonalPhaseProfile(space, wrap_phases(-np.longdouble(phi) * diff))


def abs_shift_differences(g: Generator, k: float, labels: Sequence) -> tuple:
    """Return ``(sign(k), g(n + |k|) - g(n))``; arguments never drop below ``labels``."""
    labels = np.asarray(labels, dtype=float)
    sign = math.copysign(1.0, k) if k != 0 else 0.0
    if k == 0:
        return sign, np.zeros(labels.shape)
    return sign, g(labels + abs(k)) - g(labels)
