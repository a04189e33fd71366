"""Exception types shared across the package."""


class SemijuliaError(Exception):
    """Base class for all package errors."""


class ConfigError(SemijuliaError):
    """Invalid configuration: bad coefficients, bad parameters, unreadable files."""


class DegreeCapError(ConfigError):
    """Composition would exceed the configured degree cap."""


class EvalOverflowError(SemijuliaError):
    """Evaluation produced a non-finite value; treat the point as escaped."""


class NumericError(SemijuliaError):
    """A numeric routine (root finder, ...) failed to converge."""


class SeedPointError(SemijuliaError):
    """No usable repelling fixed point found to seed inverse iteration."""


class IndeterminateError(SemijuliaError):
    """The answer cannot be read off this grid (set touches the window edge)."""


class ClassificationError(SemijuliaError):
    """A containment/classification query had no unambiguous answer."""


class OrderViolationError(SemijuliaError):
    """Component order is not total; carries the offending pairs."""

    def __init__(self, message, pairs=()):
        super().__init__(message)
        self.pairs = tuple(pairs)


class ContradictionError(SemijuliaError):
    """An input point behaved against its advertised classification."""


class UnsupportedSequenceError(SemijuliaError):
    """Sequence kind not supported by this syntactic operation."""
