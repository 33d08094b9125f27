"""Exception types shared across the package."""


class AlgMinSurfError(Exception):
    """Base class for all package errors."""


class NoConvergence(AlgMinSurfError):
    """An iterative scheme (Newton lift, quadrature, solver) failed to converge."""


class AtBranchPoint(AlgMinSurfError):
    """A fiber operation was requested too close to a branch value."""


class PathTooCoarse(AlgMinSurfError):
    """Adaptive refinement of a continuation path exceeded its depth limit."""


class SheetJump(AlgMinSurfError):
    """Residual spiked mid-path; sheet tracking lost its footing."""


class NotNormalized(AlgMinSurfError):
    """Curve is not in the normalized (single common pole) shape."""


class Unsupported(AlgMinSurfError):
    """Operation not available for this curve form."""


class DegenerateGauss(AlgMinSurfError):
    """The Gauss-map denominator vanishes identically."""


class CountMismatch(AlgMinSurfError):
    """Computed polar-set cardinality differs from the declared puncture count."""


class SignatureMismatch(AlgMinSurfError):
    """Two surface data sets carry different (genus, degree, punctures) signatures."""


class AtPole(AlgMinSurfError):
    """Evaluation requested at (or too close to) a pole of the data."""


class PathThroughPole(AlgMinSurfError):
    """An integration path cannot be routed clear of a pole."""


class SingularAPeriods(AlgMinSurfError):
    """The a-period system is too ill-conditioned to normalize the basis."""


class SingularJacobian(AlgMinSurfError):
    """The finite-difference Jacobian of a period map is numerically singular."""


class ValidationRegression(AlgMinSurfError):
    """A solver produced data that no longer passes membership validation."""

    def __init__(self, message, report=None, data=None):
        super().__init__(message)
        self.report = report
        self.data = data


class OutOfRange(AlgMinSurfError):
    """Argument outside the declared domain."""


class SolverDivergence(AlgMinSurfError):
    """The linear-system solver for a grid problem diverged."""


class SearchExhausted(AlgMinSurfError):
    """The density search hit its index budget; epsilon is too small for it."""
