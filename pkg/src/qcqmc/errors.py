"""Exception hierarchy shared by every subpackage."""


class QcqmcError(Exception):
    """Base class for all errors raised by qcqmc."""


class ParseError(QcqmcError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedSystemError(QcqmcError, ValueError):
    """Odd electron counts and other systems the pipeline cannot represent."""


class NotPSDError(QcqmcError, ValueError):
    pass


class DomainError(QcqmcError, ValueError):
    pass


class ResourceError(QcqmcError):
    """A dense or exponential computation would exceed its configured cap."""


class TrialValidityError(QcqmcError, ValueError):
    """Trial circuit does not fix the vacuum or leaks out of the particle sector."""


class SectorError(QcqmcError, ValueError):
    pass


class IllConditionedCalibrationError(QcqmcError, ArithmeticError):
    pass


class PropagationDivergedError(QcqmcError, ArithmeticError):
    pass


class EnsembleCollapseError(QcqmcError, ArithmeticError):
    pass


class EmptyDatasetError(QcqmcError, ValueError):
    pass


class ConfigError(QcqmcError, ValueError):
    pass
