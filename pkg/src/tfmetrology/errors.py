"""Exception hierarchy shared by every module.

Two families matter to callers: configuration problems (bad input documents)
and numerical preconditions (a grid or basis too small for the requested
computation). The CLI maps them to distinct exit codes.
"""

from __future__ import annotations


class TFError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigInvalid(TFError):
    exit_code = 2


class PreconditionError(TFError):
    """A numerical precondition failed; the result would be untrustworthy."""

    exit_code = 3


class GridTooNarrow(PreconditionError):
    pass


class GridMismatch(PreconditionError):
    pass


class BasisMismatch(GridMismatch):
    """Operator needs the other coordinate basis (modes vs plus/minus)."""


class EdgeLeakage(PreconditionError):
    pass


class SupportOverflow(PreconditionError):
    pass


class BasisTruncation(PreconditionError):
    pass


class NonHermitianOverlap(PreconditionError):
    pass


class SymmetryViolation(PreconditionError):
    pass


class PoorFit(PreconditionError):
    pass


class NonInvertible(PreconditionError):
    pass


class ToleranceFailure(TFError):
    exit_code = 1
