"""Exception hierarchy shared by all stablelam modules."""


class StablelamError(Exception):
    """Base class for all package errors."""


# -- weight families ---------------------------------------------------------

class WeightError(StablelamError):
    pass


class NonCritical(WeightError):
    """Sum of j*mu_j differs from 1 beyond tolerance."""


class NegativeWeight(WeightError):
    pass


class Mu1Nonzero(WeightError):
    """A weight was supplied for degree 1 (structurally forbidden)."""


# -- trees and sampling ------------------------------------------------------

class NotInternal(StablelamError):
    """children_positions called on a leaf vertex."""


class Overflow(StablelamError):
    """Galton-Watson sample exceeded the vertex cap."""


class UnreachableLeafCount(StablelamError):
    """The weight family puts zero mass on trees with this leaf count."""


class RetryBudgetExhausted(StablelamError):
    pass


class TooLarge(StablelamError):
    """Exhaustive enumeration requested above the guard size."""


# -- dissections and paths ---------------------------------------------------

class InvalidPath(StablelamError):
    """Sequence is not a valid coding walk."""


class BadTheta(StablelamError):
    pass


class BudgetExceeded(StablelamError):
    """Grid size beyond the configured cell budget."""


class ExcursionNotClosed(StablelamError):
    """Cell budget was hit before the excursion straddling 1 closed."""


class BadEps(StablelamError):
    """Jump threshold below the grid noise floor (or otherwise unusable)."""


# -- laminations and fractal -------------------------------------------------

class MissingJumps(StablelamError):
    """Path has no jump annotations (or wrong kind) for chord extraction."""


class SourceMismatch(StablelamError):
    """Lamination was not generated from the supplied path."""


class EmptyInput(StablelamError):
    pass


class DegenerateWindow(StablelamError):
    """Too few usable scales for a dimension fit."""


class BadInput(StablelamError):
    """Malformed input file or record."""
