"""Exception hierarchy shared by every pcsplab module."""


class PCSPError(Exception):
    pass


class BudgetExceeded(PCSPError):
    """A size or search budget was hit; the caller must raise the limit."""


class NodeLimitExceeded(BudgetExceeded):
    pass


class CapExceeded(BudgetExceeded):
    pass


class ParseError(PCSPError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SignatureMismatch(PCSPError, ValueError):
    pass


class ArityMismatch(PCSPError, ValueError):
    pass


class MissingArity(PCSPError, ValueError):
    pass


class InvalidSandwich(PCSPError, ValueError):
    pass


class WrongTemplate(PCSPError, ValueError):
    pass


class InvalidPoint(PCSPError, ValueError):
    pass


class MalformedSelection(PCSPError, ValueError):
    pass


class MalformedGadget(PCSPError, ValueError):
    pass


class NotFeasible(PCSPError, ValueError):
    pass
