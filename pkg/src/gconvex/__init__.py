"""Iterated barycenters on Riemannian charts and local bounds for geodesically convex functions."""

__version__ = "0.1.0"

from .barycenter import (  # noqa: E402
    HullSample,
    SimplexSpec,
    bary_map_F,
    centered_simplex,
    hull_sample,
    iterated_barycenter,
    jacobian_F_closed_form,
    jacobian_F_numeric,
    mean_stepsizes,
)
from .errors import *  # noqa: E402,F401,F403
from .lemma import (  # noqa: E402
    BoundCertificate,
    ConvexityReport,
    CoverageReport,
    affine_stepsizes,
    bound_certificate,
    convexity_check,
    coverage_sweep,
    invert_stepsizes,
    lipschitz_probe,
    polar_targets,
)
from .manifold import (  # noqa: E402
    ChartSpec,
    GeodesicPath,
    MetricField,
    christoffel,
    conformal_test,
    euclidean,
    exp_map,
    geodesic_bvp,
    hyperbolic_ball,
    make_metric,
    metric_eval,
    path_length,
    scaled_geodesic_check,
    scaled_metric,
    sphere_chart,
)
