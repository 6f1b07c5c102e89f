"""Numerical toolkit for spacelike foliations of Lorentzian manifolds on coordinate charts."""

from .chart_metrics import MetricField, eval_metric, metric_partials
from .curvature import christoffel, radial_curvature, ric_direction, riemann
from .errors import FoliationError
from .foliation_geometry import (
    Foliation,
    acceleration,
    adapted_frame,
    full_divergence,
    leaf_divergence,
    normal_curve,
    shape_operator,
    unit_normal,
)
from .jets import DualScalar, Jet
from .zoo import SpacetimeSpec, zoo_build, zoo_list

__version__ = "0.1.0"
