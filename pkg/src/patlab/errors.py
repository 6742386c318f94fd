"""Exception types raised across the package."""


class PatLabError(Exception):
    """Base class for all package errors."""


class InvalidFieldError(PatLabError):
    """A scalar field contains NaN/Inf or does not match its grid."""


class InvalidTraceError(PatLabError):
    """A boundary trace is empty, too short, or malformed."""


class GridMismatchError(PatLabError):
    """Two objects that must share a grid or recording geometry do not."""


class SolverFailureError(PatLabError):
    """An iterative linear solve did not reach its target residual."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class BlowUpError(PatLabError):
    """A time-domain simulation became unstable."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class ConfigError(PatLabError):
    """A configuration value violates its invariants or cannot be parsed."""


class DegenerateStateError(PatLabError):
    """An initial state has zero mass where a nonzero one is required."""


class DegenerateMeasurementError(PatLabError):
    """A reference trace is identically zero."""


class RegionPreconditionError(PatLabError):
    """An ensemble member violates the uniqueness-region precondition."""

    def __init__(self, message: str, offenders: list[int] | None = None):
        super().__init__(message)
        self.offenders = offenders or []


class PhantomSpecError(PatLabError):
    """A phantom specification is unusable (overlapping margin, bad kind...)."""


class SaturationError(PatLabError):
    """A perturbation target cannot be reached under the admissible bounds."""

    def __init__(self, message: str, achievable: float | None = None):
        super().__init__(message)
        self.achievable = achievable


class StepSizeError(PatLabError):
    """An iteration diverged; the step size should be reduced."""
