"""Exception hierarchy shared by all mapmix modules.

The CLI maps these onto process exit codes: configuration problems exit
with 2, data problems with 3, and numeric problems with 4.
"""


class MapmixError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(MapmixError):
    """Invalid configuration: bad parameter values, missing required inputs."""

    exit_code = 2


class DataError(MapmixError):
    """Problems with data content rather than configuration."""

    exit_code = 3


class FormatError(DataError):
    """On-disk file does not match the expected binary/JSON layout."""


class CorruptionError(DataError):
    """File layout is recognized but the payload is inconsistent or truncated."""


class SchemaError(DataError):
    """Well-formed data that violates the corpus schema (unknown dialect, D mismatch, ...)."""


class CoverageError(DataError):
    """A dialect has no training material where some is required."""


class DegenerateCorpusError(DataError):
    """An operation would leave no usable training examples."""


class LogIntegrityError(DataError):
    """Training-dynamics log is ragged or out of range."""


class PartitionError(DataError):
    """Too few entries to partition into regions."""


class StrategyError(DataError):
    """A pair-sampling strategy cannot run on this data (required region empty)."""


class EvaluationError(DataError):
    """Evaluation could not produce a prediction for an utterance."""


class NumericError(MapmixError):
    """Non-finite values or numerically invalid inputs."""

    exit_code = 4
