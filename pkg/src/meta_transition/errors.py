"""Exception hierarchy for meta-transition."""

from typing import Optional


class MetaTransitionError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(MetaTransitionError, ValueError):
    """An argument violates a documented precondition."""


class ShapeError(MetaTransitionError, ValueError):
    """Array shapes do not conform."""


class InvalidConfigError(MetaTransitionError, ValueError):
    """A configuration value is outside its valid range."""


class CoverageError(InvalidInputError):
    """A class has no samples where at least one is required."""

    def __init__(self, class_index: int, where: str = "meta split"):
        self.class_index = class_index
        super().__init__(f"class {class_index} has no samples in the {where}")


class DivergenceError(MetaTransitionError, RuntimeError):
    """Training produced a non-finite or exploding loss."""

    def __init__(self, iteration: int, loss: float, what: str = "loss"):
        self.iteration = iteration
        self.loss = loss
        super().__init__(
            f"training diverged at iteration {iteration}: {what}={loss!r}"
        )


class DatasetParseError(MetaTransitionError, ValueError):
    """A dataset or matrix file could not be parsed."""

    def __init__(self, message: str, line_number: Optional[int] = None,
                 path: Optional[str] = None):
        self.line_number = line_number
        self.path = path
        location = ""
        if path:
            location += f"{path}: "
        if line_number is not None:
            location += f"line {line_number}: "
        super().__init__(location + message)
