"""Shift errors, emergent phase errors and their metrological cost for nonlinear generators."""

__version__ = "0.1.0"

from .exceptions import DomainError, IntegrationError, PrecisionError, SupportError
from .generators import Linear, Plateau, PowerLaw, Table, kerr, parse_generator
from .hilbert import DensityMatrix, PureState, ShiftError, SpectrumSet, basis_state, superposition

__all__ = [
    "__version__",
    "DomainError",
    "IntegrationError",
    "PrecisionError",
    "SupportError",
    "Linear",
    "Plateau",
    "PowerLaw",
    "Table",
    "kerr",
    "parse_generator",
    "DensityMatrix",
    "PureState",
    "ShiftError",
    "SpectrumSet",
    "basis_state",
    "superposition",
]
