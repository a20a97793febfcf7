"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed user input: bad vertex ids, syntax errors, bad files."""


class RegexSyntaxError(InputError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class NumericalError(ArithmeticError):
    """A floating point computation failed a tolerance or convergence check."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
