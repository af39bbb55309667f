"""Exception types shared across the toolkit."""


class KtraceError(Exception):
    """Base class for all toolkit errors."""


class ShapeError(KtraceError):
    """Tensor shapes incompatible with the requested operation."""


class NonFiniteError(KtraceError):
    """A NaN or Inf showed up where only finite values are allowed."""


class SchemaError(KtraceError):
    """Input file does not match the declared CSV schema."""


class RowError(KtraceError):
    """A single input row could not be parsed; message carries line context."""


class DataError(KtraceError):
    """Corrupt in-memory data (e.g. skill index out of range)."""


class DegenerateSkillError(KtraceError):
    """A skill has no positive raw score, so scores cannot be normalized."""


class ConfigError(KtraceError):
    """Invalid or inconsistent run configuration."""


class DivergenceError(KtraceError):
    """Training produced a non-finite loss."""


class UndefinedMetricError(KtraceError):
    """Metric is undefined for the given inputs (e.g. single-class AUC)."""


class CheckpointError(KtraceError):
    """Checkpoint file is malformed or inconsistent with the request."""
