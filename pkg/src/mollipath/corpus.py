"""Bundled example paths used by the verification suites and the tests.

Coordinates for the three-point, six-point and gamma-sweep paths are our own
choices. The abs path, the slope-1/slope-30 kink and the flower curve are
fixed by their definitions.
"""

import math

import numpy as np

from .polyline import Polyline

ABS_PATH = Polyline([(-1.0, 1.0), (0.0, 0.0), (1.0, 1.0)])

THREE_POINT_PATH = Polyline([(0.0, 0.0), (1.0, 2.0), (3.0, 1.0)])

SIX_POINT_PATH = Polyline([(0.0, 0.0), (1.0, 1.5), (2.0, 0.0), (3.0, 2.0), (4.0, 0.5),
                           (5.0, 1.5)])

GAMMA_SWEEP_PATH = Polyline([(0.0, 0.0), (1.0, 2.0), (3.0, 2.5), (4.0, 0.5), (6.0, 1.0),
                             (7.0, 3.0)])

# scalar f(x) = x for x < 0 and 30 x for x >= 0, breakpoint at t = 1
KINK_PATH = Polyline([[-1.0], [0.0], [30.0]])

GAMMA_SWEEP = (-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0)

FLOWER_SAMPLES = 2000
FLOWER_PERIOD = 2.0 * math.pi


def flower_points(samples: int = FLOWER_SAMPLES) -> np.ndarray:
    """``(2 + cos 2s)(cos s, sin s)`` for ``s`` uniform on ``[0, 2 pi]``."""
    s = np.linspace(0.0, FLOWER_PERIOD, samples)
    return (2.0 + np.cos(2.0 * s))[:, None] * np.column_stack([np.cos(s), np.sin(s)])


def flower_path(samples: int = FLOWER_SAMPLES) -> Polyline:
    return Polyline(flower_points(samples))


def curve_eps_to_param(eps: float, pl: Polyline, period: float = FLOWER_PERIOD) -> float:
    """Convert a mollifier radius in curve-parameter units to polyline units.

    The curve is parametrized over ``[0, period]`` while the polyline runs
    over ``[0, p]``.
    """
    return eps * pl.segments / period


def named_paths() -> dict[str, Polyline]:
    return {
        "abs": ABS_PATH,
        "three_point": THREE_POINT_PATH,
        "six_point": SIX_POINT_PATH,
        "gamma_sweep": GAMMA_SWEEP_PATH,
    }
