"""Exception hierarchy shared by every module."""


class ProcacheError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(ProcacheError, ValueError):
    """Invalid scheme parameters or scenario configuration."""


class CapacityError(ProcacheError, ValueError):
    """A request exceeds what the field or an oracle can handle."""


class FieldMismatchError(ProcacheError, TypeError):
    """Operands belong to different fields."""


class InsufficientSharesError(ProcacheError):
    pass


class MixedEpochError(ProcacheError):
    """Shares from different renewal epochs were combined."""


class LedgerViolation(ProcacheError):
    """A one-time key context was derived for encryption twice."""


class ProtocolError(ProcacheError):
    """A protocol step ran out of order or a broadcast is missing."""
