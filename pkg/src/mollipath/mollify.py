"""Closed-form mollification of polylines.

Write the extended polyline as its first segment plus one ramp per interior
breakpoint::

    f(t) = f_1(t) + sum_k J_k (t - k)_+ ,   J_k = P~_{k+1} - P~_k

Convolving a ramp with ``phi_eps`` only needs the kernel primitives at
``u_k = (t - k) / eps``::

    F(t)  = f_1(t) + sum_k J_k [ (t-k) Phi(u_k) - eps M(u_k) ]
    D(t)  =          sum_k J_k   eps M(u_k)
    F'(t) = P~_1   + sum_k J_k Phi(u_k)
    D'(t) =          sum_k J_k (t-k) phi_eps(t-k)

and for m >= 2, with the derivative recurrence for the directional term,

    F^(m) = sum_k J_k phi_eps^(m-2)(t-k)
    D^(m) = sum_k J_k [ (m-1) phi_eps^(m-2)(t-k) + (t-k) phi_eps^(m-1)(t-k) ]

The directional mollification is ``F + D`` and the combined family is
``F + gamma D``.  Every function here accepts a scalar ``t`` (returning a
vector of length n) or an array of parameters (returning shape
``t.shape + (n,)``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .curvature import curvature_from_derivatives
from .kernel import Kernel
from .polyline import Polyline

__all__ = [
    "Method",
    "SmoothingConfig",
    "SampledPath",
    "conventional_eval",
    "directional_term_eval",
    "directional_eval",
    "combined_eval",
    "evaluate",
    "sample",
]

# bound on the (samples x breakpoints) work arrays
_CHUNK_ELEMENTS = 1 << 21


class Method(str, enum.Enum):
    CONVENTIONAL = "conventional"
    DIRECTIONAL = "directional"
    COMBINED = "combined"


@dataclass(frozen=True)
class SmoothingConfig:
    eps: float
    gamma: float = 1.0
    method: Method = Method.COMBINED

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps!r}")
        object.__setattr__(self, "method", Method(self.method))

    @property
    def effective_gamma(self) -> float:
        if self.method is Method.CONVENTIONAL:
            return 0.0
        if self.method is Method.DIRECTIONAL:
            return 1.0
        return float(self.gamma)


@dataclass
class SampledPath:
    parameters: np.ndarray
    positions: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    curvature: np.ndarray

    def __len__(self):
        return self.parameters.size


def _weights(kernel, eps, shift, order, f_weight, d_weight):
    """Per-breakpoint scalar weights multiplying the slope jumps."""
    u = shift / eps
    if order == 0:
        w = f_weight * (shift * kernel.cdf(u))
        if d_weight != f_weight:
            w = w + (d_weight - f_weight) * (eps * kernel.moment(u))
        return w
    if order == 1:
        w = f_weight * kernel.cdf(u)
        if d_weight:
            w = w + d_weight * (u * kernel(u))
        return w
    # grouped as (f + (m-1) d) phi^(m-2) + d x phi^(m-1) to avoid cancellation
    w = (f_weight + (order - 1) * d_weight) * kernel.scaled(eps, shift, order - 2)
    if d_weight:
        w = w + d_weight * (shift * kernel.scaled(eps, shift, order - 1))
    return w


def evaluate(pl: Polyline, kernel: Kernel, eps: float, t, order: int = 0,
             f_weight: float = 1.0, d_weight: float = 0.0):
    """``f_weight * F^(order)(t) + d_weight * D^(order)(t)`` in closed form."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    if order < 0:
        raise ValueError("order must be nonnegative")
    ta = np.asarray(t, dtype=float)
    flat = ta.ravel()
    n = pl.dimension
    if order == 0:
        base = f_weight * (pl.waypoints[0] + pl.differences[0] * flat[:, None])
    elif order == 1:
        base = np.broadcast_to(f_weight * pl.differences[0], (flat.size, n)).copy()
    else:
        base = np.zeros((flat.size, n))

    jumps = pl.slope_jumps
    if jumps.shape[0]:
        breaks = np.arange(1, pl.segments, dtype=float)
        step = max(1, _CHUNK_ELEMENTS // breaks.size)
        for start in range(0, flat.size, step):
            sl = slice(start, start + step)
            shift = flat[sl, None] - breaks[None, :]
            base[sl] += _weights(kernel, eps, shift, order, f_weight, d_weight) @ jumps
    return base.reshape(ta.shape + (n,))


def conventional_eval(pl: Polyline, kernel: Kernel, eps: float, t, order: int = 0):
    """Conventional mollification ``F = f * phi_eps`` or its derivative."""
    return evaluate(pl, kernel, eps, t, order, 1.0, 0.0)


def directional_term_eval(pl: Polyline, kernel: Kernel, eps: float, t, order: int = 0):
    """Directional derivative term ``D = Df * (id phi_eps)`` or its derivative."""
    return evaluate(pl, kernel, eps, t, order, 0.0, 1.0)


def directional_eval(pl: Polyline, kernel: Kernel, eps: float, t, order: int = 0):
    """Directional mollification ``F + D``."""
    return evaluate(pl, kernel, eps, t, order, 1.0, 1.0)


def combined_eval(pl: Polyline, kernel: Kernel, cfg: SmoothingConfig, t, order: int = 0):
    """Member ``F + gamma D`` of the combined family selected by ``cfg``."""
    return evaluate(pl, kernel, cfg.eps, t, order, 1.0, cfg.effective_gamma)


def sample(pl: Polyline, kernel: Kernel, cfg: SmoothingConfig, t_start: float, t_end: float,
           count: int) -> SampledPath:
    """Evaluate position, derivatives and curvature on a uniform grid.

    Curvature is NaN where the speed vanishes.
    """
    if int(count) != count or count < 2:
        raise ValueError(f"count must be an integer >= 2, got {count!r}")
    if not t_start < t_end:
        raise ValueError(f"need t_start < t_end, got [{t_start}, {t_end}]")
    ts = np.linspace(t_start, t_end, int(count))
    pos = combined_eval(pl, kernel, cfg, ts, 0)
    d1 = combined_eval(pl, kernel, cfg, ts, 1)
    d2 = combined_eval(pl, kernel, cfg, ts, 2)
    kappa = curvature_from_derivatives(d1, d2, strict=False)
    return SampledPath(ts, pos, d1, d2, kappa)
