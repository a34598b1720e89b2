"""Exception hierarchy for the Gauss-Renyi toolkit.

Every error carries the process exit code the CLI should use when it escapes ``run()``.
"""


class GaussRenyiError(Exception):
    """Base class for all library errors"""

    exit_code = 1


class DomainRefusal(GaussRenyiError):
    """A request outside the mathematically meaningful range (e.g. p=0 for the density)"""

    exit_code = 2


class DigitUndefinedError(GaussRenyiError):
    """a_1 is undefined: x=0 under the Gauss map or x=1 under the Renyi map"""


class ReconstructionError(GaussRenyiError):
    pass


class InvalidIndexError(GaussRenyiError):
    pass


class InvalidMatrixError(GaussRenyiError):
    pass


class TruncationError(GaussRenyiError):
    """Series truncation cannot reach the requested tolerance"""

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


class InvalidIntervalError(GaussRenyiError):
    pass


class EnumerationSizeError(GaussRenyiError):
    pass


class GapTooSmallError(GaussRenyiError):
    """Power iteration did not settle within its iteration budget"""


class ConditioningError(GaussRenyiError):
    def __init__(self, message: str, condition_number: float):
        super().__init__(message)
        self.condition_number = condition_number


class ConsistencyError(GaussRenyiError):
    pass


class BesselRangeError(GaussRenyiError):
    pass


class AccuracyError(GaussRenyiError):
    """Two independent quadrature rules disagree by more than the tolerance"""


class SchemaValidationError(GaussRenyiError):
    """An output document does not match its bundled JSON schema"""


class VerificationFailure(GaussRenyiError):
    exit_code = 3
