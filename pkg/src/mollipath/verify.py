"""Independent quadrature oracle and executable property checks.

The oracle integrates the defining convolutions directly with a batched
adaptive Simpson rule.  It uses the kernel only through point evaluations
of ``phi`` and its derivatives, never the CDF or moment tables used by the
closed form in :mod:`mollipath.mollify`.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import corpus
from .curvature import (bound_combined, corner_geometry, curvature_from_derivatives,
                        exact_corner_curvature)
from .kernel import Kernel
from .mollify import conventional_eval, directional_eval, directional_term_eval, evaluate
from .polyline import Polyline

__all__ = [
    "OracleError",
    "CheckReport",
    "adaptive_simpson",
    "quadrature_oracle",
    "hull_distance",
    "chord_length",
    "check_waypoint_preservation",
    "check_coincidence_windows",
    "check_switching_smoothness",
    "check_length_ordering",
    "check_counterexamples",
    "check_corner_convexity",
    "check_curvature_bound",
    "SUITES",
    "run_suite",
    "default_seed",
]

DEFAULT_SEED = 20240917
SEED_ENV = "MOLLIPATH_SEED"


class OracleError(RuntimeError):
    """The reference quadrature did not converge; a test-infrastructure failure."""


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, DEFAULT_SEED))


# -- oracle ---------------------------------------------------------------------


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-10, max_depth: int = 50):
    """Adaptive Simpson quadrature of a vector-valued ``f`` on ``[a, b]``.

    ``f`` maps an array of abscissae of shape (m,) to values of shape (m, n).
    All open subintervals are refined together, one level per pass.  Each
    subinterval is accepted once its two half-rules agree with the whole
    rule to within ``15 * tol_local``; the local tolerance halves with
    every split so the total error stays near ``tol``.
    """
    if b <= a:
        return np.zeros(np.shape(f(np.array([a])))[1:])
    xs = np.array([a, 0.5 * (a + b), b])
    fa, fm, fb = f(xs)
    lo = np.array([a])
    hi = np.array([b])
    fa, fm, fb = fa[None], fm[None], fb[None]
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    tols = np.array([tol])
    total = np.zeros_like(whole[0])
    for _ in range(max_depth):
        mid = 0.5 * (lo + hi)
        q = np.concatenate([0.5 * (lo + mid), 0.5 * (mid + hi)])
        fq = f(q)
        k = lo.size
        flm, frm = fq[:k], fq[k:]
        h = (hi - lo)[:, None]
        left = h / 12.0 * (fa + 4.0 * flm + fm)
        right = h / 12.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        err = np.max(np.abs(delta), axis=1)
        done = err <= 15.0 * tols
        total = total + np.sum((left + right + delta / 15.0)[done], axis=0)
        todo = ~done
        if not np.any(todo):
            return total
        lo, mid, hi = lo[todo], mid[todo], hi[todo]
        fa, flm, fm, frm, fb = fa[todo], flm[todo], fm[todo], frm[todo], fb[todo]
        left, right, t2 = left[todo], right[todo], tols[todo] / 2.0
        lo = np.concatenate([lo, mid])
        hi = np.concatenate([mid, hi])
        fa, fm, fb = (np.concatenate([fa, fm]), np.concatenate([flm, frm]),
                      np.concatenate([fm, fb]))
        whole = np.concatenate([left, right])
        tols = np.concatenate([t2, t2])
    raise OracleError(f"adaptive Simpson did not converge within depth {max_depth}")


def quadrature_oracle(pl: Polyline, kernel: Kernel, eps: float, gamma: float, t: float,
                      order: int = 0, tol: float = 1e-10) -> np.ndarray:
    """``F^(order)(t) + gamma D^(order)(t)`` by direct quadrature.

    With ``s = t - eps u`` the two convolutions become integrals over
    ``u in [-1, 1]``::

        F^(m) = eps^-m     int f(t - eps u) phi^(m)(u) du
        D^(m) = eps^(1-m)  int Df(t - eps u) [m phi^(m-1)(u) + u phi^(m)(u)] du

    The interval is split where ``t - eps u`` crosses a breakpoint so each
    piece sees a single affine segment.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    p = pl.segments
    cuts = [(t - k) / eps for k in range(1, p)]
    edges = sorted({-1.0, 1.0, *[c for c in cuts if -1.0 < c < 1.0]})
    pieces = [(lo_, hi_) for lo_, hi_ in zip(edges[:-1], edges[1:]) if hi_ > lo_]
    total = np.zeros(pl.dimension)
    for lo_, hi_ in pieces:
        s_mid = t - eps * 0.5 * (lo_ + hi_)
        r = int(min(max(math.floor(s_mid), 0), p - 1))
        start = pl.waypoints[r]
        slope = pl.differences[r]

        def integrand(u, start=start, slope=slope, r=r):
            s = t - eps * u
            value = start[None, :] + slope[None, :] * (s - r)[:, None]
            phi_m = kernel.deriv(u, order)
            out = eps ** (-order) * value * phi_m[:, None]
            if gamma:
                w = u * phi_m
                if order:
                    w = w + order * kernel.deriv(u, order - 1)
                out = out + gamma * eps ** (1 - order) * slope[None, :] * w[:, None]
            return out

        total = total + adaptive_simpson(integrand, lo_, hi_, tol / max(len(pieces), 1))
    return total


# -- reports --------------------------------------------------------------------


@dataclass
class CheckReport:
    """Outcome of one executable property check.

    ``worst_violation`` is the smallest signed margin over all probed
    points: positive or zero means the property held with room to spare,
    negative means it was violated by that amount.  The check passes when
    ``worst_violation >= -tolerance``.
    """

    check_id: str
    passed: bool
    worst_violation: float
    tolerance: float
    details: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({
            "check_id": self.check_id,
            "passed": self.passed,
            "worst_violation": self.worst_violation,
            "tolerance": self.tolerance,
            "metadata": self.metadata,
        }, sort_keys=True)


def _report(check_id, rows, tolerance, **metadata):
    """``rows`` are (point, observed, expected, margin)."""
    details = [(pt, obs, exp, tolerance) for pt, obs, exp, _ in rows]
    worst = min((float(m) for *_, m in rows), default=0.0)
    return CheckReport(check_id, bool(worst >= -tolerance), worst, tolerance, details,
                       metadata)


def chord_length(points) -> float:
    return float(np.linalg.norm(np.diff(points, axis=0), axis=1).sum())


def hull_distance(vertices, queries) -> np.ndarray:
    """Signed distance-like margin of ``queries`` outside ``co(vertices)``.

    Returns the largest facet-plane offset for each query (zero or negative
    inside the hull, positive outside).  Degenerate point sets are projected
    onto their affine hull first; the distance off that hull is added.
    """
    v = np.asarray(vertices, dtype=float)
    q = np.asarray(queries, dtype=float)
    if v.shape[1] == 1:
        lo, hi = v.min(), v.max()
        return np.maximum(lo - q[:, 0], q[:, 0] - hi)
    try:
        hull = ConvexHull(v)
    except (QhullError, ValueError):
        center = v.mean(axis=0)
        _, sv, vt = np.linalg.svd(v - center)
        rank = int(np.sum(sv > 1e-12 * max(sv[0], 1e-300)))
        if rank == 0:
            return np.linalg.norm(q - center, axis=1)
        basis = vt[:rank]
        vc = (v - center) @ basis.T
        qc = (q - center) @ basis.T
        off = np.linalg.norm((q - center) - qc @ basis, axis=1)
        return np.maximum(hull_distance(vc, qc), 0.0) + off if rank < v.shape[1] else \
            hull_distance(vc, qc)
    eq = hull.equations
    return np.max(q @ eq[:, :-1].T + eq[:, -1], axis=1)


def _length_grid(p: int, count: int) -> np.ndarray:
    # includes every integer breakpoint so chord sums see the waypoints
    per = max(1, math.ceil((count - 1) / p))
    return np.linspace(0.0, p, per * p + 1)


# -- checks ---------------------------------------------------------------------


def check_waypoint_preservation(pl: Polyline, kernel: Kernel, eps: float, gamma: float = 1.0,
                                tol: float = 1e-9) -> CheckReport:
    if not 0 < eps < 1:
        raise ValueError("waypoint preservation needs eps in (0, 1)")
    ks = np.arange(1, pl.segments, dtype=float)
    rows = []
    if ks.size:
        got = evaluate(pl, kernel, eps, ks, 0, 1.0, gamma)
        for k, g in zip(ks, got):
            err = float(np.linalg.norm(g - pl.waypoints[int(k)]))
            rows.append((k, g.tolist(), pl.waypoints[int(k)].tolist(), -err))
    return _report("waypoint_preservation", rows, tol, eps=eps, gamma=gamma,
                   segments=pl.segments)


def check_coincidence_windows(pl: Polyline, kernel: Kernel, eps: float, gamma: float,
                              tol: float = 1e-9, points: int = 101) -> CheckReport:
    if not 0 < eps < 0.5:
        raise ValueError("coincidence windows need eps in (0, 1/2)")
    rows = []
    for r in range(1, pl.segments + 1):
        ts = np.linspace(r - 1 + eps, r - eps, points)
        got = evaluate(pl, kernel, eps, ts, 0, 1.0, gamma)
        ref = pl.eval(ts)
        err = np.linalg.norm(got - ref, axis=1)
        i = int(np.argmax(err))
        rows.append((float(ts[i]), got[i].tolist(), ref[i].tolist(), -float(err[i])))
    return _report("coincidence_windows", rows, tol, eps=eps, gamma=gamma)


def check_switching_smoothness(pl: Polyline, kernel: Kernel, eps: float, gamma_a: float,
                               gamma_b: float, r: int, tol: float = 1e-6,
                               h: float = 1e-3) -> CheckReport:
    """Switch from ``G^gamma_a`` to ``G^gamma_b`` at the middle of window ``r``.

    Compares value and first two derivatives of the two members at the
    switch point, and central differences of the hybrid path straddling the
    switch against the analytic derivatives of the first member.
    """
    if not 0 < eps < 0.5:
        raise ValueError("switching needs eps in (0, 1/2)")
    if not 1 <= r <= pl.segments:
        raise ValueError(f"segment index {r} out of range")
    m = r - 0.5

    def hybrid(t):
        g = gamma_a if t < m else gamma_b
        return evaluate(pl, kernel, eps, t, 0, 1.0, g)

    rows = []
    for order in range(3):
        a = evaluate(pl, kernel, eps, m, order, 1.0, gamma_a)
        b = evaluate(pl, kernel, eps, m, order, 1.0, gamma_b)
        rows.append((f"jump{order}", b.tolist(), a.tolist(), -float(np.linalg.norm(a - b))))
    left, mid, right = hybrid(m - h), hybrid(m), hybrid(m + h)
    fd1 = (right - left) / (2 * h)
    fd2 = (right - 2 * mid + left) / h**2
    d1 = evaluate(pl, kernel, eps, m, 1, 1.0, gamma_a)
    d2 = evaluate(pl, kernel, eps, m, 2, 1.0, gamma_a)
    rows.append(("fd1", fd1.tolist(), d1.tolist(), -float(np.linalg.norm(fd1 - d1))))
    rows.append(("fd2", fd2.tolist(), d2.tolist(), -float(np.linalg.norm(fd2 - d2))))
    return _report("switching_smoothness", rows, tol, eps=eps, gamma_a=gamma_a,
                   gamma_b=gamma_b, segment=r)


def check_length_ordering(pl: Polyline, kernel: Kernel, eps: float, tol: float = 1e-6,
                          count: int = 10_000) -> CheckReport:
    """Chord lengths satisfy ``L(F) <= L(f) <= L(F + D)`` on ``[0, p]``."""
    if not 0 < eps < 1:
        raise ValueError("length ordering needs eps in (0, 1)")
    ts = _length_grid(pl.segments, count)
    lf = pl.length()
    lc = chord_length(conventional_eval(pl, kernel, eps, ts))
    ld = chord_length(directional_eval(pl, kernel, eps, ts))
    rows = [("conventional<=f", lc, lf, lf - lc), ("f<=directional", ld, lf, ld - lf)]
    return _report("length_ordering", rows, tol, eps=eps, samples=int(ts.size))


def check_corner_convexity(y, kernel: Kernel, eps: float, tol_first: float = 1e-9,
                           tol_second: float = 1e-8, tol_shape: float = 1e-9) -> CheckReport:
    """Local shape of the directional mollification at a scalar V corner.

    ``y = (y0, y1, y2)``.  Asserts ``D'(1) = 0``, ``D''(1) = phi_eps(0)(y0 + y2 - 2 y1)``
    and, on a window around ``t = 1`` found by halving, that the smoothed
    function is convex and below the V (concave and above it for an
    inverted V).  Margins are scaled so a single zero tolerance applies.
    """
    y0, y1, y2 = map(float, y)
    pl = Polyline([[y0], [y1], [y2]])
    jump = y0 + y2 - 2.0 * y1
    d1 = float(directional_term_eval(pl, kernel, eps, 1.0, 1)[0])
    d2 = float(directional_term_eval(pl, kernel, eps, 1.0, 2)[0])
    expected = kernel.scaled(eps, 0.0, 0) * jump
    rows = [
        ("D'(1)", d1, 0.0, tol_first - abs(d1)),
        ("D''(1)", d2, expected, tol_second - abs(d2 - expected)),
    ]
    sign = 1.0 if jump > 0 else -1.0
    found = None
    if jump != 0.0:
        delta = min(eps, 0.5)
        while delta > 1e-4:
            ts = np.linspace(1.0 - delta, 1.0 + delta, 201)
            g = directional_eval(pl, kernel, eps, ts)[:, 0]
            second = sign * (g[2:] - 2.0 * g[1:-1] + g[:-2])
            below = sign * (pl.eval(ts)[:, 0] - g)
            if second.min() >= -tol_shape and below.min() >= -tol_shape:
                found = (delta, float(second.min()), float(below.min()))
                break
            delta /= 2.0
        if found is None:
            rows.append(("window", None, "convex neighbourhood", -1.0))
        else:
            rows.append(("window", found[0], "convex neighbourhood", 0.0))
    return _report("corner_convexity", rows, 0.0, y=[y0, y1, y2], eps=eps,
                   window=None if found is None else found[0])


def check_curvature_bound(pl: Polyline, kernel: Kernel, eps: float, gamma: float,
                          samples: int = 2001, rel_slack: float = 1e-6,
                          rel_agree: float = 1e-8, min_speed: float = 1e-6) -> CheckReport:
    """Three-point path: sampled curvature vs the closed-form bound and exact formula.

    Margins are relative: ``1 + rel_slack - kappa / bound`` and
    ``rel_agree - |kappa - kappa_exact| / kappa_exact``.
    """
    if pl.segments != 2:
        raise ValueError("curvature bound check needs a three-point path")
    geom = corner_geometry(*pl.differences)
    bound = bound_combined(geom, kernel, eps, gamma)
    ts = np.linspace(0.0, 2.0, samples)
    d1 = evaluate(pl, kernel, eps, ts, 1, 1.0, gamma)
    d2 = evaluate(pl, kernel, eps, ts, 2, 1.0, gamma)
    speed = np.linalg.norm(d1, axis=1)
    ok = speed > min_speed
    kappa = curvature_from_derivatives(d1[ok], d2[ok])
    exact = exact_corner_curvature(geom, kernel, eps, ts[ok], gamma)
    rows = []
    if kappa.size:
        i = int(np.argmax(kappa))
        if bound > 0:
            rows.append((float(ts[ok][i]), float(kappa[i]), bound,
                         1.0 + rel_slack - kappa[i] / bound))
        else:
            rows.append((float(ts[ok][i]), float(kappa[i]), 0.0, -float(kappa[i])))
        scale = np.maximum(np.abs(exact), np.abs(kappa))
        rel = np.divide(np.abs(kappa - exact), scale, out=np.zeros_like(scale),
                        where=scale > 0)
        j = int(np.argmax(rel))
        rows.append((float(ts[ok][j]), float(kappa[j]), float(exact[j]),
                     rel_agree - float(rel[j])))
    return _report("curvature_bound", rows, 0.0, eps=eps, gamma=gamma, bound=bound)


def _flower_properties(kernel, pl, eps_param, count):
    ts = _length_grid(pl.segments, count)
    fh = directional_eval(pl, kernel, eps_param, ts)
    length = chord_length(fh)
    outside = float(np.max(hull_distance(fh, pl.waypoints)))
    return length, outside


def check_counterexamples(kernel: Kernel, flower_samples: int = corpus.FLOWER_SAMPLES,
                          count: int = 8000, tol: float = 1e-6) -> CheckReport:
    """Reproduce the documented failures of the directional mollification.

    * flower curve, curve-scale eps = 5: length shrinks below the original
      and the original leaves the convex hull of the smoothed curve;
    * same curve at eps = 1.25: neither failure occurs;
    * slope-1/slope-30 kink at eps = 0.5: the smoothed function is not
      monotone although the input is.

    Existence margins are the size of the violation found minus 1e-9; the
    "holds" margins include ``tol`` of slack.  The report tolerance is 0.
    """
    pl = corpus.flower_path(flower_samples)
    lf = pl.length()
    rows = []
    big = corpus.curve_eps_to_param(5.0, pl)
    small = corpus.curve_eps_to_param(1.25, pl)
    l5, out5 = _flower_properties(kernel, pl, big, count)
    l125, out125 = _flower_properties(kernel, pl, small, count)
    rows.append(("flower eps=5 length", l5, f"< {lf}", (lf - l5) - 1e-9))
    rows.append(("flower eps=5 hull", out5, "> 0", out5 - 1e-9))
    rows.append(("flower eps=1.25 length", l125, f">= {lf}", (l125 - lf) + tol))
    rows.append(("flower eps=1.25 hull", out125, "<= 0", -out125 + tol))

    kink = corpus.KINK_PATH
    ts = np.linspace(0.0, 2.0, 4001)
    slope = directional_eval(kink, kernel, 0.5, ts, 1)[:, 0]
    rows.append(("kink eps=0.5 slope", float(slope.min()), "< 0", -float(slope.min()) - 1e-9))
    return _report("counterexamples", rows, 0.0, flower_samples=flower_samples,
                   eps_rescaling="eps_param = eps_curve * p / (2 pi)",
                   flower_eps_param=[big, small])


# -- suites ---------------------------------------------------------------------


def _random_polyline(rng, points, dim=2):
    return Polyline(rng.normal(size=(points, dim)) * 2.0)


def _suite_waypoints(kernel, paths, rng):
    for pl in paths:
        for eps in (0.1, 0.3, 0.5, 0.9):
            yield check_waypoint_preservation(pl, kernel, eps)


def _suite_windows(kernel, paths, rng):
    for pl in paths:
        for eps in (0.1, 0.25, 0.4):
            for gamma in (-1.0, 0.0, 0.5, 1.0, 2.0):
                yield check_coincidence_windows(pl, kernel, eps, gamma)
    six = corpus.SIX_POINT_PATH
    for ga, gb in ((0.0, 1.0), (1.0, -1.0), (0.5, 0.5)):
        for r in range(1, six.segments + 1):
            yield check_switching_smoothness(six, kernel, 0.4, ga, gb, r)


def _suite_lengths(kernel, paths, rng):
    extra = [_random_polyline(rng, 6) for _ in range(3)]
    for pl in [*paths, *extra]:
        for eps in (0.25, 0.45):
            yield check_length_ordering(pl, kernel, eps)


def _suite_curvature(kernel, paths, rng):
    three = [pl for pl in paths if pl.segments == 2]
    three += [_random_polyline(rng, 3) for _ in range(5)]
    for pl in three:
        for eps in (0.1, 0.25, 0.5):
            for gamma in (-1.0, 0.0, 0.5, 1.0, 2.0):
                yield check_curvature_bound(pl, kernel, eps, gamma)


def _suite_counterexamples(kernel, paths, rng):
    yield check_counterexamples(kernel)


def _suite_convexity(kernel, paths, rng):
    shapes = [(1.0, 0.0, 1.0), (0.0, 1.0, 0.0), (3.0, -1.0, 0.5)]
    for _ in range(5):
        y = rng.normal(size=3)
        if abs(y[0] + y[2] - 2 * y[1]) > 1e-3:
            shapes.append(tuple(y))
    for y in shapes:
        for eps in (0.25, 0.5):
            yield check_corner_convexity(y, kernel, eps)


SUITES = {
    "waypoints": _suite_waypoints,
    "windows": _suite_windows,
    "lengths": _suite_lengths,
    "curvature": _suite_curvature,
    "counterexamples": _suite_counterexamples,
    "convexity": _suite_convexity,
}


def run_suite(name: str, kernel: Kernel, paths=None, seed: int | None = None):
    """Yield the reports of suite ``name`` (or every suite for ``"all"``)."""
    if name != "all" and name not in SUITES:
        raise KeyError(name)
    if paths is None:
        paths = list(corpus.named_paths().values())
    names = list(SUITES) if name == "all" else [name]
    for n in names:
        rng = np.random.default_rng(default_seed() if seed is None else seed)
        yield from SUITES[n](kernel, paths, rng)
