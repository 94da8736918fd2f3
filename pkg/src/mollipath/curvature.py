"""Curvature of mollified corners, closed-form bounds and epsilon selection."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .kernel import Kernel
from .polyline import Polyline

__all__ = [
    "CornerGeometry",
    "CornerBound",
    "CurvatureReport",
    "UndefinedCurvatureError",
    "UnboundedCurvatureError",
    "wedge_norm",
    "corner_geometry",
    "corners",
    "curvature_from_derivatives",
    "exact_corner_curvature",
    "bound_directional",
    "bound_combined",
    "conventional_reference_bound",
    "sampled_max_curvature",
    "select_epsilon",
    "EPS_CLAMP",
    "DEFAULT_EPSILON",
]

log = logging.getLogger(__name__)

# keeps every coincidence window [r-1+eps, r-eps] nonempty
EPS_CLAMP = 0.499
# returned when no corner constrains epsilon (all corners collinear)
DEFAULT_EPSILON = 0.1


class UndefinedCurvatureError(ArithmeticError):
    """Curvature requested where the path has zero speed."""


class UnboundedCurvatureError(ArithmeticError):
    """The speed lower bound of a corner is zero, so no finite bound exists."""


def wedge_norm(a, b):
    """Norm of the bivector ``a ^ b`` (area of the spanned parallelogram).

    Uses the Lagrange identity ``sum_{i<j} (a_i b_j - a_j b_i)^2``, which
    equals ``|a|^2 |b|^2 - <a, b>^2`` but returns exactly zero for exactly
    parallel inputs.  Broadcasts over leading axes.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1:] != b.shape[-1:]:
        raise ValueError(f"dimension mismatch: {a.shape[-1:]} vs {b.shape[-1:]}")
    i, j = np.triu_indices(a.shape[-1], k=1)
    minors = np.abs(a[..., i] * b[..., j] - a[..., j] * b[..., i])
    # rescale before squaring so tiny minors do not underflow
    big = np.max(minors, axis=-1, initial=0.0)
    safe = np.where(big > 0, big, 1.0)[..., None]
    out = big * np.sqrt(np.sum((minors / safe) ** 2, axis=-1))
    return float(out) if out.ndim == 0 else out


def curvature_from_derivatives(d1, d2, strict: bool = True):
    """``|d2 ^ d1| / |d1|^3``.

    With ``strict`` a zero first derivative raises
    :class:`UndefinedCurvatureError`; otherwise those entries are NaN.
    """
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    speed = np.linalg.norm(d1, axis=-1)
    zero = speed == 0.0
    if strict and np.any(zero):
        raise UndefinedCurvatureError("zero speed: curvature undefined")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.asarray(wedge_norm(d2, d1)) / speed**3
    out = np.where(zero, np.nan, out)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CornerGeometry:
    p_tilde_1: np.ndarray
    p_tilde_2: np.ndarray
    s_bar: float
    wedge_norm: float
    denom: float


def corner_geometry(p_tilde_1, p_tilde_2) -> CornerGeometry:
    """Geometry of the corner between incoming ``p_tilde_1`` and outgoing ``p_tilde_2``.

    ``s_bar`` minimizes ``|s p_tilde_1 + (1-s) p_tilde_2|`` over the whole
    real line and ``denom`` is that minimum.
    """
    a = np.array(p_tilde_1, dtype=float)
    b = np.array(p_tilde_2, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("corner vectors must be 1-d with equal length")
    if not np.any(a) or not np.any(b):
        raise ValueError("zero-length segment at corner")
    diff = b - a
    dd = float(diff @ diff)
    s_bar = float(diff @ b) / dd if dd > 0 else 0.5
    denom = float(np.linalg.norm(s_bar * a + (1.0 - s_bar) * b))
    a.setflags(write=False)
    b.setflags(write=False)
    return CornerGeometry(a, b, s_bar, wedge_norm(b, a), denom)


def corners(pl: Polyline) -> list[CornerGeometry]:
    """Geometry of every interior corner ``k = 1 .. p-1`` in order."""
    d = pl.differences
    return [corner_geometry(d[k - 1], d[k]) for k in range(1, pl.segments)]


def exact_corner_curvature(geom: CornerGeometry, kernel: Kernel, eps: float, t,
                           gamma: float = 1.0):
    """Exact curvature of ``F + gamma D`` for a single corner at ``t = 1``.

    With ``x = t - 1``, ``h = x phi_eps(x)``, ``A2 = Phi(x/eps)`` and
    ``A1 = 1 - A2``::

        G'  = P~1 (A1 - gamma h) + P~2 (A2 + gamma h)
        G'' = (P~2 - P~1) [ (1 + gamma) phi_eps(x) + gamma x phi_eps'(x) ]

    so ``kappa = |(1+gamma) phi_eps + gamma x phi_eps'| |P~2 ^ P~1| / |G'|^3``.
    ``gamma = 1`` is the directional mollification.
    """
    x = np.asarray(t, dtype=float) - 1.0
    phi = kernel.scaled(eps, x, 0)
    h = x * phi
    a2 = kernel.cdf(x / eps)
    a1 = 1.0 - a2
    speed_vec = (np.multiply.outer(a1 - gamma * h, geom.p_tilde_1)
                 + np.multiply.outer(a2 + gamma * h, geom.p_tilde_2))
    speed = np.linalg.norm(speed_vec, axis=-1)
    if np.any(speed == 0.0):
        raise UndefinedCurvatureError("zero speed: curvature undefined")
    coeff = (1.0 + gamma) * phi + gamma * x * kernel.scaled(eps, x, 1)
    out = np.abs(coeff) * geom.wedge_norm / speed**3
    return float(out) if out.ndim == 0 else out


def _check_bounded(geom):
    if geom.wedge_norm == 0.0:
        return False
    if geom.denom == 0.0:
        raise UnboundedCurvatureError("corner speed lower bound is zero")
    return True


def bound_directional(geom: CornerGeometry, kernel: Kernel, eps: float) -> float:
    """``|phi'|_inf / eps^2 * |P~2 ^ P~1| / denom^3``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not _check_bounded(geom):
        return 0.0
    return kernel.sup_phi_prime / eps**2 * geom.wedge_norm / geom.denom**3


def bound_combined(geom: CornerGeometry, kernel: Kernel, eps: float, gamma: float) -> float:
    """``(|gamma| |phi'|_inf / eps^2 + |1-gamma| |phi|_inf / eps) |P~2 ^ P~1| / denom^3``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not _check_bounded(geom):
        return 0.0
    scale = abs(gamma) * kernel.sup_phi_prime / eps**2 + abs(1.0 - gamma) * kernel.sup_phi / eps
    return scale * geom.wedge_norm / geom.denom**3


def conventional_reference_bound(geom: CornerGeometry, kernel: Kernel, eps: float) -> float:
    """Known bound for the conventional mollification, kept for comparison.

    The speed minimum is taken over ``s in [0, 1]`` rather than the real line.
    """
    if geom.wedge_norm == 0.0:
        return 0.0
    if 0.0 <= geom.s_bar <= 1.0:
        m = 1.0 / geom.denom**3
    else:
        m = max(np.linalg.norm(geom.p_tilde_1) ** -3, np.linalg.norm(geom.p_tilde_2) ** -3)
    return kernel.sup_phi / eps * geom.wedge_norm * m


def _invert_bound(geom, kernel, kappa_max, gamma):
    # bound(eps) = C (a x^2 + b x) with x = 1/eps; take the positive root
    if not _check_bounded(geom):
        return None
    c = geom.wedge_norm / geom.denom**3
    a = abs(gamma) * kernel.sup_phi_prime * c
    b = abs(1.0 - gamma) * kernel.sup_phi * c
    if a == 0.0:
        x = kappa_max / b
    else:
        x = 2.0 * kappa_max / (b + math.sqrt(b * b + 4.0 * a * kappa_max))
    return 1.0 / x


def sampled_max_curvature(pl: Polyline, kernel: Kernel, eps: float, gamma: float,
                          count: int = 2001) -> float:
    """Largest derivative-based curvature of ``F + gamma D`` near the corners.

    Samples ``count`` points on ``[k - eps, k + eps]`` around every interior
    breakpoint; away from these windows the path is straight for eps < 1/2.
    """
    from .mollify import evaluate

    if pl.segments < 2:
        return 0.0
    local = np.linspace(-eps, eps, count)
    ts = (np.arange(1, pl.segments)[:, None] + local[None, :]).ravel()
    d1 = evaluate(pl, kernel, eps, ts, 1, 1.0, gamma)
    d2 = evaluate(pl, kernel, eps, ts, 2, 1.0, gamma)
    kappa = curvature_from_derivatives(d1, d2, strict=False)
    if np.all(np.isnan(kappa)):
        return math.nan
    return float(np.nanmax(kappa))


@dataclass
class CornerBound:
    index: int
    geometry: CornerGeometry
    bound: float
    eps: float | None

    def to_dict(self):
        g = self.geometry
        return {
            "corner": self.index,
            "p_tilde_1": g.p_tilde_1.tolist(),
            "p_tilde_2": g.p_tilde_2.tolist(),
            "s_bar": g.s_bar,
            "wedge_norm": g.wedge_norm,
            "denom": g.denom,
            "bound_at_selected_eps": self.bound,
            "eps": self.eps,
        }


@dataclass
class CurvatureReport:
    per_corner: list[CornerBound]
    selected_eps: float
    kappa_max: float
    gamma: float
    clamped: bool
    sampled_kappa: float | None = None
    refined_eps: float | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        if self.sampled_kappa is None or math.isnan(self.sampled_kappa):
            return not self.clamped
        return self.sampled_kappa <= self.kappa_max

    def to_dict(self):
        return {
            "selected_eps": self.selected_eps,
            "kappa_max": self.kappa_max,
            "gamma": self.gamma,
            "clamped": self.clamped,
            "sampled_kappa": self.sampled_kappa,
            "feasible": self.feasible,
            "refined_eps": self.refined_eps,
            "per_corner": [c.to_dict() for c in self.per_corner],
            "warnings": list(self.warnings),
        }


def select_epsilon(pl: Polyline, kernel: Kernel, kappa_max: float, gamma: float = 1.0,
                   verify: bool = True, refine: bool = False,
                   samples: int = 2001) -> CurvatureReport:
    """Pick epsilon so every per-corner curvature bound meets ``kappa_max``.

    Each corner's bound is inverted for its own ``eps_k`` and the largest is
    taken, then clamped to :data:`EPS_CLAMP` so corners cannot interact.
    With ``verify`` the curvature is sampled at the selected epsilon.  With
    ``refine`` a bisection looks for the smallest epsilon whose sampled
    curvature still meets the budget; this is a heuristic since it relies on
    sampling.
    """
    if not kappa_max > 0:
        raise ValueError(f"kappa_max must be positive, got {kappa_max!r}")
    if pl.segments < 2:
        raise ValueError("path has no corner")
    geoms = corners(pl)

    eps_k = [_invert_bound(g, kernel, kappa_max, gamma) for g in geoms]
    finite = [e for e in eps_k if e is not None]
    warnings = []
    clamped = False
    if not finite:
        selected = DEFAULT_EPSILON
    else:
        selected = max(finite)
        if selected > EPS_CLAMP:
            selected = EPS_CLAMP
            clamped = True

    per_corner = [CornerBound(i + 1, g, bound_combined(g, kernel, selected, gamma), e)
                  for i, (g, e) in enumerate(zip(geoms, eps_k))]
    report = CurvatureReport(per_corner, selected, float(kappa_max), float(gamma), clamped,
                             warnings=warnings)

    if verify or refine:
        report.sampled_kappa = sampled_max_curvature(pl, kernel, selected, gamma, samples)
        if not report.feasible:
            msg = (f"sampled curvature {report.sampled_kappa:.6g} exceeds budget "
                   f"{kappa_max:.6g} at eps={selected:.6g}")
            warnings.append(msg)
            log.warning(msg)
    if refine and report.feasible and finite:
        lo, hi = 1e-3 * selected, selected
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if sampled_max_curvature(pl, kernel, mid, gamma, samples) <= kappa_max:
                hi = mid
            else:
                lo = mid
        report.refined_eps = hi
    return report
