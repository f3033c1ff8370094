"""Exception hierarchy for slspec."""


class SlspecError(Exception):
    """Base class for all slspec errors."""


class DimensionMismatchError(SlspecError):
    """Array length does not match the grid it is paired with."""


class IntegrationOverflowError(SlspecError):
    """Solution magnitude exceeded the overflow guard during integration."""

    def __init__(self, step_index, magnitude):
        self.step_index = int(step_index)
        self.magnitude = float(magnitude)
        super().__init__(
            f"integration overflow at step {step_index}: |y| = {magnitude:.3e}"
        )


class MissingEigenvalueError(SlspecError):
    """No sign change of the characteristic function found for an index."""

    def __init__(self, index):
        self.index = int(index)
        super().__init__(f"could not bracket eigenvalue index {index}")


class DegenerateRootError(SlspecError):
    """Characteristic function is near zero on an interval without a sign change."""


class IterationFailureError(SlspecError):
    """Fixed-point or bisection iteration failed to converge."""


class InsufficientDataError(SlspecError):
    """Too few records to fit the asymptotic model."""


class DomainError(SlspecError):
    """Input values outside the admissible numeric domain."""


class MalformedDataError(SlspecError):
    """Spectral data violate basic structural preconditions."""


class CompletionError(SlspecError):
    """Series completion requested beyond supplied data without a tail model."""


class UnsolvableGLError(SlspecError):
    """The discretized Gelfand-Levitan operator is singular or too ill-conditioned."""

    def __init__(self, condition, row):
        self.condition = float(condition)
        self.row = int(row)
        super().__init__(
            f"Gelfand-Levitan system unsolvable at row {row}: condition {condition:.3e}"
        )


class EndpointDegeneracyError(SlspecError):
    """Reconstructed eigenfunction vanishes at the right endpoint."""
