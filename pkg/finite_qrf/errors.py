from typing import Optional


class QrfError(ValueError):
    """
    Base class of all errors raised by the toolkit.
    """


class DimensionMismatchError(QrfError):
    """
    Raised when operators, states, representations or measures do not share the expected dimension.
    """


class InvariantViolationError(QrfError):
    """
    Raised when an object fails one of its defining invariants at construction.
    """

    def __init__(self, invariant: str, message: str, object_path: Optional[str] = None,
                 violation: Optional[float] = None):
        """
        :param invariant: Short name of the violated invariant (e.g. "normalization").
        :param message: Human readable description.
        :param object_path: (Optional) Path or id of the offending object.
        :param violation: (Optional) The measured size of the violation.
        """
        self.invariant = invariant
        self.object_path = object_path
        self.violation = violation
        prefix = f"{object_path}: " if object_path else ""
        super().__init__(f"{prefix}{invariant} violated: {message}")

    def at(self, object_path: str) -> "InvariantViolationError":
        """
        Returns a copy of the error located at the given object path.
        """
        return InvariantViolationError(self.invariant, str(self).split("violated: ", 1)[-1], object_path,
                                       self.violation)


class PreconditionError(QrfError):
    """
    Raised when a check cannot be evaluated because its inputs do not satisfy a precondition.
    """

    def __init__(self, message: str, residual: Optional[float] = None):
        self.residual = residual
        super().__init__(message)


class ScenarioError(QrfError):
    """
    Raised when a scenario file cannot be parsed or contains unresolved references.
    """

    def __init__(self, message: str, json_path: Optional[str] = None):
        self.json_path = json_path
        prefix = f"{json_path}: " if json_path else ""
        super().__init__(prefix + message)


class InvalidElementError(QrfError):
    """
    Raised when a group element, sample point or base point does not exist.
    """
