"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    pass


class ShapeError(ValueError):
    pass


class InvalidConfigurationError(ValueError):
    pass


class UndefinedStatisticError(ValueError):
    """A statistic is undefined for the input (zero variance, zero mean)."""


class NumericFailureError(FloatingPointError):
    pass


class IdxParseError(ValueError):
    """Base class for IDX container errors. Carries the offending path."""

    def __init__(self, message, path=None, offset=None):
        self.path = path
        self.offset = offset
        where = ""
        if path is not None:
            where = f"{path}"
            if offset is not None:
                where += f" @ byte {offset}"
            where += ": "
        super().__init__(where + message)


class BadMagicError(IdxParseError):
    pass


class TruncatedPayloadError(IdxParseError):
    pass


class CountMismatchError(IdxParseError):
    pass
