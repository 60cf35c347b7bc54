"""Exception types shared across the package."""


class StprofilerError(Exception):
    """Base class for every error raised by this package."""


class ManifestError(StprofilerError):
    """Manifest file could not be parsed; carries line/column when known."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaValidationError(StprofilerError):
    """A schema manifest violates one or more structural invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class SchemaMismatchError(StprofilerError):
    """Data on disk does not match the schema (columns, arity, headers)."""


class ParseError(StprofilerError):
    """A cell could not be parsed; carries row index and column name."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class DanglingReferenceError(StprofilerError):
    """A mapping column holds an identifier absent from its side store."""


class DegenerateGeometryError(StprofilerError):
    """Polygon has zero area and no defined centroid."""


class CoordinateRangeError(StprofilerError, ValueError):
    """Latitude/longitude outside the valid degree ranges."""


class ShapeError(StprofilerError):
    """A point's values do not match the dimension declared for a sub-feature."""


class EmptyInputError(StprofilerError):
    """An operation that needs at least one value received none."""


class InvalidValueError(StprofilerError):
    """Non-finite values (NaN) where finite numbers are required."""


class IncompatibleHistogramError(StprofilerError):
    """Histograms or distributions with mismatched bin structure."""


class UnsupportedFeatureError(StprofilerError):
    """A non-numeric column was passed where scores need numbers."""


class UndefinedScoreError(StprofilerError):
    """Every feature-label pair was excluded; the score has no value."""


class UndefinedVarianceError(StprofilerError):
    """R2 is undefined because the labels have zero total variance."""


class UnsupportedTaskError(StprofilerError):
    """Task shape (e.g. variable-length labels) the baseline cannot handle."""


class EmptyDomainError(StprofilerError):
    """A nonzero sampling fraction was requested over an empty domain."""


class LeakageError(StprofilerError):
    """Sampled out-of-distribution coordinates appear in the training split."""

    def __init__(self, message, offenders=()):
        super().__init__(message)
        self.offenders = list(offenders)


class ConfigurationError(StprofilerError):
    """Invalid configuration (empty vocabulary, unknown score function, ...)."""
