"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class ConifoldError(Exception):
    exit_code = 1


class InvalidInputError(ConifoldError, ValueError):
    exit_code = 2


class InconsistentTopologyError(ConifoldError):
    exit_code = 3

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class CutoffInsufficientError(ConifoldError):
    exit_code = 4


class ConvergenceError(CutoffInsufficientError):
    """The eigensolver could not certify the spectrum up to the cutoff."""

    def __init__(self, message, residuals=()):
        super().__init__(message)
        self.residuals = list(residuals)


class ExceptionalRateError(ConifoldError):
    exit_code = 5


class CrossCheckError(ConifoldError):
    exit_code = 6


class StabilityViolationError(ConifoldError):
    exit_code = 7


class MeshError(InvalidInputError):
    pass


class OffParseError(MeshError):
    pass


class NonTriangleFaceError(MeshError):
    pass


class BoundaryEdgeError(MeshError):
    pass


class NonManifoldEdgeError(MeshError):
    pass


class OrientationError(MeshError):
    pass


class DegenerateFaceError(MeshError):
    pass


class CompletenessWarning(UserWarning):
    """A spectrum cutoff does not certify the requested weight window."""
