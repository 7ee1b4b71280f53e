"""Exception taxonomy shared across the package.

Three top-level families map onto the CLI exit codes: model-contract
violations (bad orders, incompatible shapes, impossible requests), numeric
failures (rank loss, non-convergent root finding, unresolvable phases), and
plain I/O problems which are left to the standard OSError/ValueError types
and translated at the CLI boundary.
"""

from __future__ import annotations

__all__ = [
    "JumprecError",
    "ModelError",
    "NumericError",
    "DetectionError",
    "AmbiguityError",
    "RootFindError",
    "WeakJumpWarning",
]


class JumprecError(Exception):
    """Base class for all library-raised errors."""


class ModelError(JumprecError):
    """The request contradicts the model contract (orders, counts, bounds)."""


class NumericError(JumprecError):
    """A numerical procedure failed to reach its guaranteed accuracy."""


class DetectionError(NumericError):
    """Jump detection could not certify the expected number of jumps.

    Attributes
    ----------
    rank : int
        Numerical rank of the detection system that was actually observed.
    expected : int
        Number of jumps the caller asked for.
    """

    def __init__(self, message: str, rank: int, expected: int):
        super().__init__(message)
        self.rank = rank
        self.expected = expected


class AmbiguityError(NumericError):
    """A phase/root could not be disambiguated within the safe radius."""


class RootFindError(NumericError):
    """Polynomial root finding failed to converge or was handed junk."""


class WeakJumpWarning(UserWarning):
    """Recovered leading magnitude sits below half the declared floor."""
