"""Exception types shared across the pipeline."""


class QRNGError(Exception):
    pass


class ConfigurationError(QRNGError, ValueError):
    """Invalid parameters, or a table built for a different (M, N)."""


class ContractViolation(QRNGError, ValueError):
    """A documented precondition was not met by the caller."""


class CapacityError(QRNGError, ValueError):
    pass


class CorruptTableError(QRNGError):
    pass


class EmptyInputError(QRNGError, ValueError):
    pass


class InsufficientDataError(QRNGError, ValueError):
    pass


class FitError(QRNGError):
    """Raised when a histogram cannot support an exponential fit."""


class FormatError(QRNGError):
    def __init__(self, message, path=None, offset=None):
        self.path = path
        self.offset = offset
        where = []
        if path is not None:
            where.append(str(path))
        if offset is not None:
            where.append(f"byte {offset}")
        if where:
            message = f"{': '.join(where)}: {message}"
        super().__init__(message)
