"""Exception and warning types shared across the package."""


class PtspecError(Exception):
    """Base class for all package-specific errors."""


class UsageError(PtspecError):
    """Invalid configuration or arguments (CLI exit code 2)."""


class NumericalError(PtspecError):
    """A numerical procedure failed or is untrustworthy (CLI exit code 3)."""


class OddnessError(UsageError):
    """A potential violates the required odd symmetry W(-x) = -W(x)."""


class BasisMismatchError(UsageError):
    """Two operators refer to different basis truncations."""


class UnboundedPotentialError(UsageError):
    """An operation requiring a finite sup norm got an unbounded potential."""


class ToleranceAmbiguityError(NumericalError):
    """A singular value lies too close to a rank-decision threshold."""


class EigensolverError(NumericalError):
    """Dense eigensolver failed to converge or violated its residual contract."""


class DegenerateFrameError(NumericalError):
    """Gram-Schmidt pivot fell below threshold; frame is numerically dependent."""


class EmptyTrustWindowError(NumericalError):
    """No eigenvalue survived the two-truncation stability comparison."""


class GapInconsistencyError(NumericalError):
    """The closed-form level spacing disagrees with brute-force enumeration."""


class DegenerateFitError(NumericalError):
    """All discrepancies sit at the noise floor; a slope fit is meaningless."""


class QuadratureOrderWarning(UserWarning):
    """Doubling the quadrature order moved some matrix entry noticeably."""


class ExactnessWindowWarning(UserWarning):
    """A series coefficient was computed beyond the truncation-exact window."""
