"""Exception hierarchy shared across the package."""


class AmnisError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(AmnisError):
    """Tensor shapes do not conform to the operation being applied."""


class ContractError(AmnisError):
    """An API was called in a way that violates its documented contract."""


class NumericError(AmnisError):
    """Non-finite values or domain violations in a numeric computation."""


class TrainingError(AmnisError):
    """The training loop hit an unrecoverable condition (bad gradients,
    excessive simulator timeouts, non-finite loss)."""


class SimulationError(AmnisError):
    """A stochastic simulator failed to produce valid output."""


class DataError(AmnisError):
    """User-supplied data is malformed; messages carry line/row numbers."""


class ConfigError(AmnisError):
    """A configuration document or checkpoint is used inconsistently;
    messages carry the offending config path."""


class CheckpointError(AmnisError):
    """A checkpoint file is corrupt, truncated or of an unsupported version."""
