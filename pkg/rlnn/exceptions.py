"""Module defining exceptions of the rlnn application."""


class RlnnException(Exception):
    """Base class for exceptions raised by rlnn."""


class PreprocessingError(RlnnException):
    """Error raised during preprocessing of user input."""


class InvalidRequest(RlnnException):
    """Engine indicated invalid request."""


class CommunicationError(RlnnException):
    """Unexpected error while running a request."""


class InvalidConfigError(RlnnException):
    """Invalid configuration encountered."""


class ModelError(RlnnException):
    """Base exception for the market module."""


class NotPositiveSemiDefinite(ModelError):
    """Correlation matrix admits no Cholesky factor."""


class InvalidSchedule(ModelError):
    """Monitoring dates are not a valid schedule."""


class PayoffError(RlnnException):
    """Base exception for the payoff module."""


class MissingField(PayoffError):
    """Payoff kind requires a field that is absent."""


class InvalidPayoff(PayoffError):
    """Invalid payoff definition."""


class NetworkError(RlnnException):
    """Base exception for the network and analytic modules."""


class DimensionMismatch(NetworkError):
    """Input dimension does not match the network."""


class InputSpaceMismatch(NetworkError):
    """Network was trained on a different input space."""


class InsufficientData(NetworkError):
    """Too few training points."""


class HedgeError(RlnnException):
    """Base exception for the hedge module."""


class StalePortfolio(HedgeError):
    """Portfolio is valued after its maturity."""


class OracleError(RlnnException):
    """Base exception for the oracle module."""


class ScheduleMisaligned(OracleError):
    """Exercise date does not fall on a tree layer."""


class ArchiveException(RlnnException):
    """Base exception for the archive module."""


class ArchiveValidationFailure(ArchiveException):
    """Invalid document for the archive backend."""


class RunNotFound(ArchiveException):
    """Requested run not found in the archive."""
