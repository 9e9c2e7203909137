"""Exception hierarchy shared by every module."""


class LevyError(Exception):
    """Base class for all errors raised by levyput."""


class ValidationError(LevyError, ValueError):
    """A model or configuration field is invalid.

    ``field`` is a dotted path such as ``down.phases.T[0][0]``.
    """

    def __init__(self, field, message):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}" if field else message)


class ModelClassError(LevyError, ValueError):
    """The operation does not apply to this class of process."""


class PoleError(LevyError, ArithmeticError):
    """A rational transform was evaluated at (or too close to) one of its poles."""

    def __init__(self, pole, message=None):
        self.pole = complex(pole)
        super().__init__(message or f"evaluation at pole {self.pole!r}")


class StructureError(LevyError, ArithmeticError):
    """Root/pole bookkeeping failed: count mismatch, conditioning or clustering."""


class UnsupportedLimitError(LevyError, ValueError):
    """An alpha = 0 query outside the cases where the limit is identified."""


class NotOptimalToStopError(LevyError, ValueError):
    """r = 0 and the process does not drift to +infinity; no finite stopping rule is optimal."""
