"""Exception types raised by the public API.

Every error is a ValueError subclass so callers that do not care about
the precise failure mode can catch one base class.
"""


class SashimiError(ValueError):
    """Base class for all errors raised by this package."""


# input handling

class FileTooLarge(SashimiError):
    """Input exceeds the configured byte limit."""


class MalformedRow(SashimiError):
    """A data row could not be parsed; carries the 1-based line number."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class EmptyInput(SashimiError):
    """No data rows were found."""


class BadBins(SashimiError):
    """A distance grid needs at least two bin edges."""


# summary statistics

class TooFewPoints(SashimiError):
    """The estimator needs more points than the pattern provides."""


class BadSector(SashimiError):
    """Angular sector width must lie in (0, 2*pi]."""


class EmptyType(SashimiError):
    """A requested type has no points in the pattern."""


class ZeroNormalizer(SashimiError):
    """The mark-weight normalizer vanished; the estimate is undefined."""


class NegativeInput(SashimiError):
    """A value that must be nonnegative was negative."""


class GridMismatch(SashimiError):
    """Two curves or grids that must share support do not."""


# areal indices

class EmptyPattern(SashimiError):
    """The operation needs a nonempty pattern."""


class BadQ(SashimiError):
    """Quadrat grid resolution outside the supported range."""


class ConstantField(SashimiError):
    """A spatial field without variation has no defined autocorrelation."""


class EmptyGrid(SashimiError):
    """All quadrat counts are zero."""


class BothEmpty(SashimiError):
    """Both count vectors are all-zero."""


class ZeroTotal(SashimiError):
    """A count vector with zero total cannot be normalized."""


class ZeroVector(SashimiError):
    """Cosine similarity is undefined for a zero vector."""


# topology

class NoLandmarks(SashimiError):
    """Witness complex construction needs at least one landmark."""


class NoWitnesses(SashimiError):
    """Witness complex construction needs at least one witness."""


class InvalidFiltration(SashimiError):
    """A simplex appears before one of its faces."""


# functional decomposition

class TooFewCurves(SashimiError):
    """At least two curves are needed to decompose variance."""


class DegenerateGrid(SashimiError):
    """Fewer than three usable grid columns remain after NaN removal."""


# generators

class BadIntensity(SashimiError):
    """Point process intensity must be nonnegative."""


class BadNSim(SashimiError):
    """Envelope simulation count must be positive."""


# pipeline

class NoSelectedTypePresent(SashimiError):
    """None of the configured types occur in the pattern."""
