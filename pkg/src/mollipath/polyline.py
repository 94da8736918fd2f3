"""Unit-parametrized piecewise-linear paths and their affine extension."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["Polyline", "resample_curve"]


class Polyline:
    """Waypoints ``P_0 .. P_p`` in R^n joined by straight segments.

    Segment ``r`` (1-based) is traversed for ``t in [r-1, r]``.  Outside
    ``[0, p]`` the first and last segments continue affinely, so
    :meth:`eval` is defined on the whole real line.
    """

    def __init__(self, waypoints):
        pts = np.array(waypoints, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ValueError("waypoints must be a sequence of points")
        if pts.shape[0] < 2:
            raise ValueError(f"need at least 2 waypoints, got {pts.shape[0]}")
        if pts.shape[1] < 1:
            raise ValueError("waypoints must have dimension >= 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("waypoints must be finite")
        pts.setflags(write=False)
        self.waypoints = pts
        self.differences = np.diff(pts, axis=0)
        self.differences.setflags(write=False)
        # jump in slope at each interior breakpoint k = 1..p-1
        self.slope_jumps = np.diff(self.differences, axis=0)
        self.slope_jumps.setflags(write=False)

    @property
    def dimension(self) -> int:
        return self.waypoints.shape[1]

    @property
    def segments(self) -> int:
        return self.waypoints.shape[0] - 1

    def __len__(self):
        return self.waypoints.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Polyline):
            return NotImplemented
        return np.array_equal(self.waypoints, other.waypoints)

    def __repr__(self):
        return f"Polyline(p={self.segments}, n={self.dimension})"

    def _segment_index(self, t):
        return np.clip(np.floor(t), 0, self.segments - 1).astype(int)

    def eval(self, t):
        """Position on the extended path; exact at integer parameters."""
        ta = np.asarray(t, dtype=float)
        r = self._segment_index(ta)
        local = (ta - r)[..., None]
        out = self.waypoints[r] + self.differences[r] * local
        out = np.where((local == 1.0), self.waypoints[np.minimum(r + 1, self.segments)], out)
        return out

    def derivative(self, t):
        """Slope of the extended path, taking the right-hand slope at breakpoints."""
        ta = np.asarray(t, dtype=float)
        return self.differences[self._segment_index(ta)].copy()

    def length(self) -> float:
        return float(np.linalg.norm(self.differences, axis=1).sum())


def resample_curve(samples, target_spacing: float | None = None) -> Polyline:
    """Polyline through ``samples``, optionally subdividing long segments.

    Each segment longer than ``target_spacing`` is split into equal pieces
    so no piece exceeds it.  Used to feed smooth curves into the closed-form
    evaluators.
    """
    pts = np.array(samples, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] < 2:
        raise ValueError(f"need at least 2 samples, got {pts.shape[0]}")
    if target_spacing is None:
        return Polyline(pts)
    if not target_spacing > 0:
        raise ValueError("target_spacing must be positive")
    out = [pts[:1]]
    for a, b in zip(pts[:-1], pts[1:]):
        pieces = max(1, math.ceil(np.linalg.norm(b - a) / target_spacing))
        s = np.arange(1, pieces + 1)[:, None] / pieces
        out.append(a + (b - a) * s)
    return Polyline(np.concatenate(out))
