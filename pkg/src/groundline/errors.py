"""Exception and warning types shared across the package."""


class GroundlineError(Exception):
    """Base class for all groundline errors."""


class GimbalLockError(GroundlineError):
    """Euler decomposition requested at or beyond the gimbal-lock singularity."""


class CovarianceSingularError(GroundlineError):
    """Innovation covariance is not invertible (cannot occur for meas_var > 0)."""


class AlreadyAbsoluteError(GroundlineError):
    """accumulate() called on a sequence that is already absolute."""


class AlreadyRelativeError(GroundlineError):
    """differentiate() called on a sequence that is already relative."""


class EmptySequenceError(GroundlineError):
    """An estimator was given a sequence with no frames."""


class DegenerateInputError(GroundlineError):
    """Plane fitting requires at least three non-collinear points."""


class LengthMismatchError(GroundlineError):
    """Paired per-frame inputs have different lengths."""


class ParseError(GroundlineError):
    """Malformed input file; carries the offending path and line number."""

    def __init__(self, path, line_number, message):
        super().__init__(f"{path}:{line_number}: {message}")
        self.path = path
        self.line_number = line_number


class NonFiniteValueError(ParseError):
    """A parsed numeric field is NaN or infinite."""


class InvalidFactorError(GroundlineError):
    """Downsampling factor must be a positive integer."""


class InvalidConfigError(GroundlineError):
    """Simulation or run configuration rejected; names the offending field."""

    def __init__(self, field, message):
        super().__init__(f"invalid config field '{field}': {message}")
        self.field = field


class RotationRepairWarning(UserWarning):
    """A loaded rotation needed more than cosmetic re-orthonormalization."""


class LowInlierWarning(UserWarning):
    """RANSAC consensus covers less than half of the input points."""


class FrameDropWarning(UserWarning):
    """Trailing frames were dropped to keep downsampled timing uniform."""
