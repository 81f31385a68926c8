"""Exception types shared across the package."""


class UrnBanditError(Exception):
    """Base class for all package errors."""


class ArgumentError(UrnBanditError, ValueError):
    """An argument violates a documented precondition."""


class DomainError(ArgumentError):
    """A bound evaluator was called outside the region where its formula holds."""


class EvaluationError(UrnBanditError, ArithmeticError):
    """The feedback function produced a non-finite or non-positive value."""

    def __init__(self, message: str, arm: int | None = None):
        super().__init__(message)
        self.arm = arm


class ConfigError(UrnBanditError):
    """A configuration document could not be turned into an experiment.

    ``path`` is the dotted field path of the offending entry (``"arms[1].mean"``).
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
