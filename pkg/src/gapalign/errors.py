"""Exception types shared across the package."""


class GapAlignError(Exception):
    """Base class for all package-specific errors."""


class FormatError(GapAlignError):
    """A file or stream does not conform to its declared format."""


class ValidationError(GapAlignError):
    """A corpus record violates the schema or its invariants."""


class CoverageError(GapAlignError):
    """A predicate is missing from the clustering that must cover it."""


class EmptyInputError(GapAlignError):
    """An operation that requires nonempty input received an empty one."""


class OracleSizeError(GapAlignError):
    """A brute-force oracle was asked to enumerate beyond its size bound."""
