"""Exception taxonomy shared across the toolkit.

Domain errors (bad arguments, contract violations) raise plain ValueError
so callers can rely on stdlib semantics; everything listed here covers
failure modes of the numerics themselves.
"""


class HeunlockError(Exception):
    """Base class for library-level failures."""


class RangeOverflowError(HeunlockError, ValueError):
    """Argument outside the representable range (e.g. x with e^x overflowing)."""


class ConvergenceError(HeunlockError):
    """An iteration exceeded its budget without meeting its tolerance."""


class PositivityContradictionError(HeunlockError):
    """A determinant that must be positive was certified non-positive.

    Signals an internal inconsistency (bug or broken arithmetic), never a
    mathematical counterexample.
    """


class UndeterminedResultError(HeunlockError):
    """A yes/no decision fell inside the uncertified gray zone."""


class InternalConsistencyError(HeunlockError):
    """Two independent computation paths disagreed beyond tolerance."""
