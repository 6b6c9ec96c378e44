"""Exception hierarchy shared by all modules."""


class GeometryError(Exception):
    """Base class for every error raised by gconvex."""


class MetricEvaluationError(GeometryError):
    """The metric returned non-finite entries."""


class MetricDegeneracyError(GeometryError):
    """The metric is not symmetric positive definite at the queried point."""


class ChartError(GeometryError, ValueError):
    """A point lies outside the chart ball."""


class ChartExitError(GeometryError):
    """An integrated geodesic left the chart."""

    def __init__(self, message, exit_parameter):
        super().__init__(message)
        self.exit_parameter = exit_parameter


class BVPFailure(GeometryError):
    """Shooting did not converge; usually the chart is not totally normal."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class DegenerateSimplexError(GeometryError):
    """The simplex vertices are (numerically) affinely dependent."""


class DegenerateConfigurationError(GeometryError):
    """The stepsize Jacobian became singular during inversion."""


class InversionFailure(GeometryError):
    """Newton inversion of the barycentric map did not converge."""

    def __init__(self, message, residual, stepsizes=None):
        super().__init__(message)
        self.residual = residual
        self.stepsizes = stepsizes


class CannotCertifyError(GeometryError):
    """Some target is not covered, so no upper bound can be certified."""
