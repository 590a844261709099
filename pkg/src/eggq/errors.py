"""Exception hierarchy shared across the pipeline.

Exit-code mapping used by the CLI: data errors -> 2, configuration
errors -> 3, numeric errors -> 4.
"""


class EggQError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 1


class InvalidMeasurementError(EggQError):
    """A physical measurement violates a formula precondition."""

    exit_code = 2


class HaughDomainError(InvalidMeasurementError):
    """Argument of the Haugh-unit logarithm is non-positive.

    Signals a physically degenerate albumen measurement; the record is
    excluded rather than clamped.
    """


class IngestionError(EggQError):
    """A file could not be parsed into a typed table."""

    exit_code = 2


class AlignmentError(EggQError):
    """Row ids of two tables do not match."""

    exit_code = 2


class DataError(EggQError):
    """Dataset content violates an operation precondition."""

    exit_code = 2


class ConfigError(EggQError):
    """Invalid run configuration or hyperparameter setting."""

    exit_code = 3


class NumericError(EggQError):
    """Numerically degenerate input (zero variance, undefined AUC, ...)."""

    exit_code = 4


class BundleVersionError(EggQError):
    """Persisted bundle schema version is not supported by this reader."""

    exit_code = 2
