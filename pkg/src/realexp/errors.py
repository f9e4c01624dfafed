"""Exceptions shared across the engine.

Every error that an operation can signal maps to one class here, so the
command-line front end can translate failures into machine-readable JSON
uniformly.
"""


class RealexpError(Exception):
    """Base class for all engine errors."""


class PrecisionExhausted(RealexpError):
    """Interval refinement hit the digit cap without separating a sign.

    This signals an undeclared linear relation between basis constants;
    it is never silently tie-broken.
    """


class ArrangementMismatch(RealexpError):
    """A box endpoint is not among the arrangement's critical values."""


class NotFree(RealexpError):
    """An operation requiring free modules met a box with an open face."""


class BadSequence(RealexpError):
    """A truncation sequence violates monotonicity or support constraints."""


class WindowTooSmall(RealexpError):
    """A module's critical values exceed the discretization window."""


class Infeasible(RealexpError):
    """A linear system expected to be solvable had no solution (bug signal)."""


class EscapeViolated(RealexpError):
    """A support-escape certificate failed: some solution avoids the deepest
    truncation index, or a resolution pre-check did not pass."""


class NonzeroDifferential(RealexpError):
    """A differential expected to vanish after a collapse did not (bug signal)."""


class LiftFailed(RealexpError):
    """A comparison-theorem lifting system was infeasible on stabilized cells
    (bug signal)."""


class NotInGroup(RealexpError):
    """An exponent does not belong to the active exponent group."""


class NotInOpenCone(RealexpError):
    """An exponent is not in the open positive cone of the active group."""
