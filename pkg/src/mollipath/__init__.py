"""Closed-form mollification of piecewise-linear paths."""

__version__ = "0.1.0"

from .curvature import (CurvatureReport, UnboundedCurvatureError, UndefinedCurvatureError,
                        bound_combined, bound_directional, corner_geometry,
                        exact_corner_curvature, select_epsilon)
from .kernel import Kernel, build_bump_kernel
from .mollify import (Method, SmoothingConfig, combined_eval, conventional_eval,
                      directional_eval, directional_term_eval, evaluate, sample)
from .polyline import Polyline, resample_curve

__all__ = [
    "Kernel",
    "build_bump_kernel",
    "Polyline",
    "resample_curve",
    "Method",
    "SmoothingConfig",
    "evaluate",
    "conventional_eval",
    "directional_term_eval",
    "directional_eval",
    "combined_eval",
    "sample",
    "corner_geometry",
    "exact_corner_curvature",
    "bound_directional",
    "bound_combined",
    "select_epsilon",
    "CurvatureReport",
    "UndefinedCurvatureError",
    "UnboundedCurvatureError",
]
