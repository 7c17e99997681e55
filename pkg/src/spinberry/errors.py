"""Structured errors raised by the numerical pipeline."""

from __future__ import annotations


class SpinberryError(Exception):
    """Base class for structured numerical failures."""


class DegeneracyEncountered(SpinberryError):
    """An eigenvalue gap collapsed below tolerance along a parameter loop.

    Geometric phases of a degenerate level are undefined here, so loops that
    cross the tolerance abort instead of returning garbage.
    """

    def __init__(self, message: str, min_gap: float | None = None):
        super().__init__(message)
        self.min_gap = min_gap


class NullOverlap(SpinberryError):
    """A consecutive state overlap is too small; the loop is under-sampled."""


class RealityViolation(SpinberryError):
    """Gauge fixing failed to make the co-rotated amplitudes real.

    This signals a basis or convention bug, not a numerical accident.
    """


class ReducedDegeneracy(SpinberryError):
    """Reduced-state eigenvalues are too close to track their eigenvectors."""


class LoopInvariantViolation(SpinberryError):
    """A quantity that must stay constant along a loop drifted."""


class UsageError(Exception):
    """Bad command-line arguments, config files or file contents (exit 1)."""
