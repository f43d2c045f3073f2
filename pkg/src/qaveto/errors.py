"""Exception hierarchy shared across the package."""


class QAVError(Exception):
    """Base class for all package errors."""


class QSimError(QAVError, ValueError):
    """Invalid state, operator or measurement request."""


class RegisterSizeError(QSimError):
    """Register larger than the dense-simulation limit."""


class ChannelError(QSimError):
    """Malformed Kraus channel or damping parameter."""


class ConfigError(QAVError, ValueError):
    """Invalid protocol or experiment configuration."""


class DecoyMapError(QAVError, ValueError):
    """Decoy position map does not match the received sequence."""


class CapabilityError(QAVError):
    """A party attempted an operation outside its declared capabilities."""


class InvariantViolation(QAVError):
    """An internal consistency check failed."""


class EavesdropAbort(QAVError):
    """A security check failed and the run was abandoned.

    ``cause`` is a short machine-readable tag such as ``decoy:CA->V1``.
    """

    def __init__(self, cause: str, error_rate: float | None = None):
        super().__init__(cause)
        self.cause = cause
        self.error_rate = error_rate
