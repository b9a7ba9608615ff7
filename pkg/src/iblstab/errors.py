"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class IblStabError(Exception):
    exit_code = 3


class ConfigError(IblStabError):
    exit_code = 1


class DomainError(IblStabError, ValueError):
    """Argument outside the admissible region (singular parameter, range, branch)."""
    exit_code = 2


class ValidationError(DomainError):
    pass


class NumericError(IblStabError, ArithmeticError):
    exit_code = 3


class RefinementNeeded(NumericError):
    pass


class ConvergenceError(NumericError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class NoRootError(IblStabError):
    """A validated search found no root; carries diagnostics for reporting."""
    exit_code = 4

    def __init__(self, message, info=None):
        super().__init__(message)
        self.info = dict(info or {})
