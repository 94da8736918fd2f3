import time

import numpy as np

from mollipath import corpus
from mollipath.curvature import bound_combined, corners, sampled_max_curvature, select_epsilon
from mollipath.mollify import (conventional_eval, directional_eval, directional_term_eval,
                               evaluate)
from mollipath.polyline import Polyline
from mollipath.verify import (check_coincidence_windows, check_counterexamples,
                              check_curvature_bound, check_length_ordering,
                              check_waypoint_preservation, hull_distance, quadrature_oracle)

GAMMAS = (-1.0, 0.0, 0.5, 1.0, 2.0)


def test_criterion_01_oracle_equivalence(kernel, acceptance_log):
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        p = int(rng.integers(1, 9))
        n = int(rng.integers(1, 5))
        pl = Polyline(rng.normal(scale=2.0, size=(p + 1, n)))
        eps = rng.uniform(0.05, 2.0)
        gamma = rng.uniform(-2.0, 2.0)
        order = int(rng.integers(0, 3))
        t = rng.uniform(-1.0, p + 1.0)
        got = evaluate(pl, kernel, eps, t, order, 1.0, gamma)
        ref = quadrature_oracle(pl, kernel, eps, gamma, t, order)
        worst = max(worst, float(np.abs(got - ref).max()))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and elapsed < 60
    acceptance_log(1, ok, f"oracle max abs err {worst:.2e} (<= 1e-8), {elapsed:.1f} s (< 60 s)")
    assert ok


def test_criterion_02_waypoint_preservation(kernel, acceptance_log):
    start = time.perf_counter()
    reports = [check_waypoint_preservation(pl, kernel, eps)
               for pl in (corpus.ABS_PATH, corpus.SIX_POINT_PATH)
               for eps in (0.1, 0.3, 0.5, 0.9)]
    elapsed = time.perf_counter() - start
    worst = -min(r.worst_violation for r in reports)
    ok = all(r.passed for r in reports) and worst <= 1e-9 and elapsed < 1
    acceptance_log(2, ok, f"max waypoint err {worst:.2e} (<= 1e-9), {elapsed:.3f} s (< 1 s)")
    assert ok


def test_criterion_03_coincidence_windows(kernel, acceptance_log):
    rng = np.random.default_rng(103)
    paths = list(corpus.named_paths().values())
    paths += [Polyline(rng.normal(size=(7, 3))) for _ in range(3)]
    reports = [check_coincidence_windows(pl, kernel, eps, gamma, points=201)
               for pl in paths for eps in (0.1, 0.25, 0.4) for gamma in GAMMAS]
    worst = -min(r.worst_violation for r in reports)
    ok = all(r.passed for r in reports) and worst <= 1e-9
    acceptance_log(3, ok, f"max window deviation {worst:.2e} over {len(reports)} runs (<= 1e-9)")
    assert ok


def test_criterion_04_curvature_bound(kernel, acceptance_log):
    rng = np.random.default_rng(104)
    ratio = 0.0
    rel = 0.0
    ok = True
    for _ in range(100):
        pl = Polyline(rng.normal(size=(3, 2)))
        for eps in (0.1, 0.25, 0.5):
            for gamma in GAMMAS:
                rep = check_curvature_bound(pl, kernel, eps, gamma, samples=1001)
                ok &= rep.passed
                bound_row, agree_row = rep.details
                if bound_row[2] > 0:
                    ratio = max(ratio, bound_row[1] / bound_row[2])
                rel = max(rel, abs(agree_row[1] - agree_row[2]) / max(abs(agree_row[2]), 1e-300))
    ok = ok and ratio <= 1 + 1e-6 and rel <= 1e-8
    acceptance_log(4, ok, f"max kappa/bound {ratio:.9f} (<= 1 + 1e-6), "
                          f"exact vs derivative rel err {rel:.2e} (<= 1e-8)")
    assert ok


def test_criterion_05_length_ordering(kernel, acceptance_log):
    rng = np.random.default_rng(105)
    worst = np.inf
    ok = True
    for _ in range(50):
        points = int(rng.integers(3, 9))
        pl = Polyline(rng.normal(size=(points, int(rng.integers(1, 4)))))
        eps = rng.uniform(0.01, 0.49)
        rep = check_length_ordering(pl, kernel, eps, count=4000)
        ok &= rep.passed
        worst = min(worst, rep.worst_violation)
    acceptance_log(5, ok, f"worst length margin {worst:.2e} (>= -1e-6)")
    assert ok


def test_criterion_06_convergence(kernel, acceptance_log):
    rng = np.random.default_rng(106)
    pl = Polyline(rng.normal(size=(6, 2)))
    max_seg = float(np.linalg.norm(pl.differences, axis=1).max())
    s = np.linspace(-1.0, 1.0, 2001)
    errs = []
    for eps in (0.4, 0.2, 0.1, 0.05):
        ts = np.concatenate([np.linspace(0, pl.segments, 5001),
                             (np.arange(1, pl.segments)[:, None] + eps * s).ravel()])
        diff = directional_eval(pl, kernel, eps, ts) - pl.eval(ts)
        errs.append(float(np.linalg.norm(diff, axis=1).max()))
    eps_list = (0.4, 0.2, 0.1, 0.05)
    within = all(e <= 2 * max_seg * eps for e, eps in zip(errs, eps_list))
    halves = all(b <= 0.5 * a * (1 + 1e-9) for a, b in zip(errs, errs[1:]))
    ok = within and halves
    acceptance_log(6, ok, "sup errors " + ", ".join(f"{e:.3e}" for e in errs)
                   + f" (bound 2*{max_seg:.3f}*eps, ratios "
                   + ", ".join(f"{b / a:.4f}" for a, b in zip(errs, errs[1:])) + ")")
    assert ok


def test_criterion_07_order_relations(kernel, acceptance_log):
    rng = np.random.default_rng(107)
    below = above = hull = -np.inf
    for _ in range(20):
        points = int(rng.integers(3, 9))
        slopes = np.sort(rng.normal(scale=2.0, size=points - 1))
        y = np.concatenate([[0.0], np.cumsum(slopes)])
        pl = Polyline(y[:, None])
        eps = rng.uniform(0.05, 0.95)
        ts = np.linspace(-1.0, pl.segments + 1.0, 20001)
        f = pl.eval(ts)[:, 0]
        below = max(below, float((f - conventional_eval(pl, kernel, eps, ts)[:, 0]).max()))
        above = max(above, float((directional_eval(pl, kernel, eps, ts)[:, 0] - f).max()))
    for _ in range(20):
        pl = Polyline(rng.normal(size=(int(rng.integers(3, 9)), 2)))
        eps = rng.uniform(0.05, 0.95)
        ts = np.linspace(0.0, pl.segments, 5001)
        hull = max(hull, float(hull_distance(pl.waypoints,
                                             conventional_eval(pl, kernel, eps, ts)).max()))
    ok = below <= 1e-10 and above <= 1e-10 and hull <= 1e-9
    acceptance_log(7, ok, f"max (f - F) {below:.2e}, max (F_hat - f) {above:.2e} (<= 1e-10), "
                          f"hull excess {hull:.2e} (<= 1e-9)")
    assert ok


def test_criterion_08_corner_identities(kernel, acceptance_log):
    rng = np.random.default_rng(108)
    first = second = 0.0
    for _ in range(20):
        y = rng.normal(scale=3.0, size=3)
        pl = Polyline(y[:, None])
        for eps in (0.25, 0.5):
            d1 = float(directional_term_eval(pl, kernel, eps, 1.0, 1)[0])
            d2 = float(directional_term_eval(pl, kernel, eps, 1.0, 2)[0])
            expected = kernel.scaled(eps, 0.0) * (y[0] + y[2] - 2 * y[1])
            first = max(first, abs(d1))
            second = max(second, abs(d2 - expected))
    ok = first <= 1e-9 and second <= 1e-8
    acceptance_log(8, ok, f"max |D'(1)| {first:.2e} (<= 1e-9), "
                          f"max D''(1) err {second:.2e} (<= 1e-8)")
    assert ok


def test_criterion_09_counterexamples(kernel, acceptance_log):
    rep = check_counterexamples(kernel)
    rows = {r[0]: r for r in rep.details}
    lf = corpus.flower_path().length()
    l5 = rows["flower eps=5 length"][1]
    l125 = rows["flower eps=1.25 length"][1]
    out5 = rows["flower eps=5 hull"][1]
    slope = rows["kink eps=0.5 slope"][1]
    ok = rep.passed and slope < 0 and l5 < lf and out5 > 0 and l125 >= lf
    acceptance_log(9, ok, f"kink min slope {slope:.3f} (< 0); flower L(f)={lf:.4f}, "
                          f"L(eps=5)={l5:.4f} with hull excess {out5:.3f}, "
                          f"L(eps=1.25)={l125:.4f}")
    assert ok


def test_criterion_10_epsilon_selection(kernel, acceptance_log):
    pl = corpus.ABS_PATH
    kappa_max = bound_combined(corners(pl)[0], kernel, 0.5, 1.0)
    rep = select_epsilon(pl, kernel, kappa_max, 1.0)
    sampled = sampled_max_curvature(pl, kernel, rep.selected_eps, 1.0)
    ok = abs(rep.selected_eps - 0.5) <= 0.005 and sampled <= kappa_max
    acceptance_log(10, ok, f"selected eps {rep.selected_eps} (0.5 +- 1%), "
                           f"sampled kappa {sampled:.4f} <= kappa_max {kappa_max:.4f}")
    assert ok
