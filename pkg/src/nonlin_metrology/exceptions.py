"""Exception types shared across the package."""


class DomainError(ValueError):
    """A generator was evaluated outside the set where it is defined."""


class SupportError(ValueError):
    """A shift error moved amplitude out of the Hilbert space.

    ``deficit`` holds ``1 - ||E_k psi||^2`` for the offending state.
    """

    def __init__(self, message, deficit=float("nan")):
        super().__init__(message)
        self.deficit = deficit


class PrecisionError(ValueError):
    """A truncation is too coarse for the requested accuracy."""


class IntegrationError(RuntimeError):
    """The master-equation integrator drifted beyond tolerance."""
