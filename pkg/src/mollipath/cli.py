"""Command-line front end: ``mollipath {smooth,curvature,select-epsilon,verify}``."""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys

import numpy as np

from . import corpus, verify
from .curvature import (UnboundedCurvatureError, bound_combined, corners,
                        exact_corner_curvature, select_epsilon)
from .io import InputFormatError, RunManifest, read_waypoints, waypoints_csv, write_csv
from .kernel import KernelConstructionError, build_bump_kernel
from .mollify import Method, SmoothingConfig, sample

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_BAD_PARAMS = 3
EXIT_INFEASIBLE = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2, which is reserved for malformed input files
    def error(self, message):
        raise UsageError(message)


def _add_common(p, need_eps=True):
    p.add_argument("--input", help="waypoint file, JSON or CSV")
    p.add_argument("--output", help="output file (default stdout)")
    p.add_argument("--method", default="combined",
                   help="conventional, directional or combined (default)")
    if need_eps:
        p.add_argument("--epsilon", type=float, help="mollifier radius in parameter units")
    p.add_argument("--gamma", type=float, default=1.0, help="combined-family weight")
    p.add_argument("--kernel-tol", type=float, default=1e-12)
    p.add_argument("--echo-input", action="store_true",
                   help="write the parsed waypoints as CSV and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mollipath", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("smooth", help="sample the mollified path")
    _add_common(p)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--extend", type=float, nargs=2, metavar=("A", "B"),
                   help="sample [A, B] instead of [0, p]")

    p = sub.add_parser("curvature", help="curvature and closed-form bound per sample")
    _add_common(p)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--extend", type=float, nargs=2, metavar=("A", "B"))

    p = sub.add_parser("select-epsilon", help="choose epsilon for a curvature budget")
    _add_common(p, need_eps=False)
    p.add_argument("--kappa-max", type=float)
    p.add_argument("--samples", type=int, default=2001,
                   help="samples per corner for the feasibility check")

    p = sub.add_parser("verify", help="run executable property checks")
    p.add_argument("--suite", default="all")
    p.add_argument("--input", help="extra paths for the suites (default bundled corpus)")
    p.add_argument("--output")
    p.add_argument("--kernel-tol", type=float, default=1e-12)
    return parser


def _config(args):
    try:
        method = Method(args.method)
    except ValueError:
        raise UsageError(f"unknown method {args.method!r}") from None
    if args.epsilon is None:
        raise UsageError("--epsilon is required")
    if not (math.isfinite(args.epsilon) and args.epsilon > 0):
        raise UsageError("--epsilon must be positive")
    if not math.isfinite(args.gamma):
        raise UsageError("--gamma must be finite")
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    cfg = SmoothingConfig(args.epsilon, args.gamma, method)
    if cfg.eps >= 1:
        print("warning: eps >= 1, waypoints are not guaranteed to be preserved",
              file=sys.stderr)
    elif cfg.eps >= 0.5:
        print("warning: eps >= 0.5, coincidence windows are empty", file=sys.stderr)
    return cfg


def _interval(args, pl):
    if args.extend is None:
        return 0.0, float(pl.segments)
    a, b = args.extend
    if not a < b:
        raise UsageError("--extend needs A < B")
    return a, b


def _kernel(args):
    if not args.kernel_tol > 0:
        raise UsageError("--kernel-tol must be positive")
    return build_bump_kernel(args.kernel_tol)


def _load(args):
    if args.input is None:
        raise UsageError("--input is required")
    return read_waypoints(args.input)


def _manifest(args, cfg=None, **extra):
    return RunManifest(
        command=args.command, input=args.input, method=getattr(args, "method", None),
        eps=None if cfg is None else cfg.eps,
        gamma=None if cfg is None else cfg.effective_gamma,
        samples=getattr(args, "samples", None), kernel_tol=args.kernel_tol,
        output=args.output, extra=extra)


@contextlib.contextmanager
def _open_output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _echo(args, pl):
    with _open_output(args.output) as out:
        out.write(waypoints_csv(pl))
    return EXIT_OK


def cmd_smooth(args) -> int:
    pl = _load(args)
    if args.echo_input:
        return _echo(args, pl)
    cfg = _config(args)
    a, b = _interval(args, pl)
    kernel = _kernel(args)
    path = sample(pl, kernel, cfg, a, b, args.samples)
    n = pl.dimension
    header = (["t"] + [f"x{i}" for i in range(n)] + [f"d1_{i}" for i in range(n)]
              + [f"d2_{i}" for i in range(n)] + ["kappa"])
    rows = np.column_stack([path.parameters, path.positions, path.d1, path.d2,
                            path.curvature])
    with _open_output(args.output) as out:
        write_csv(out, header, rows, _manifest(args, cfg, interval=[a, b]))
    return EXIT_OK


def cmd_curvature(args) -> int:
    pl = _load(args)
    if args.echo_input:
        return _echo(args, pl)
    cfg = _config(args)
    a, b = _interval(args, pl)
    kernel = _kernel(args)
    gamma = cfg.effective_gamma
    geoms = corners(pl)
    ts = np.linspace(a, b, args.samples)

    if len(geoms) == 1:
        try:
            kappa = exact_corner_curvature(geoms[0], kernel, cfg.eps, ts, gamma)
        except ArithmeticError:
            kappa = sample(pl, kernel, cfg, a, b, args.samples).curvature
        source = "exact"
    else:
        kappa = sample(pl, kernel, cfg, a, b, args.samples).curvature
        source = "sampled"

    bounds = []
    for g in geoms:
        try:
            bounds.append(bound_combined(g, kernel, cfg.eps, gamma))
        except UnboundedCurvatureError:
            bounds.append(math.inf)
    if bounds:
        nearest = np.clip(np.rint(ts).astype(int), 1, len(geoms)) - 1
        bound = np.asarray(bounds)[nearest]
    else:
        bound = np.zeros_like(ts)
    with _open_output(args.output) as out:
        write_csv(out, ["t", "kappa", "bound"], np.column_stack([ts, kappa, bound]),
                  _manifest(args, cfg, interval=[a, b], kappa_source=source))
    return EXIT_OK


def cmd_select_epsilon(args) -> int:
    pl = _load(args)
    if args.echo_input:
        return _echo(args, pl)
    try:
        method = Method(args.method)
    except ValueError:
        raise UsageError(f"unknown method {args.method!r}") from None
    if args.kappa_max is None or not args.kappa_max > 0:
        raise UsageError("--kappa-max must be given and positive")
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    gamma = {Method.CONVENTIONAL: 0.0, Method.DIRECTIONAL: 1.0}.get(method, args.gamma)
    kernel = _kernel(args)
    try:
        report = select_epsilon(pl, kernel, args.kappa_max, gamma, samples=args.samples)
    except UnboundedCurvatureError as exc:
        raise UsageError(str(exc)) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    doc = report.to_dict()
    doc["manifest"] = _manifest(args).to_dict()
    doc["manifest"]["gamma"] = gamma
    with _open_output(args.output) as out:
        out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if report.clamped and not report.feasible:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite != "all" and args.suite not in verify.SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from all, "
                         + ", ".join(verify.SUITES))
    paths = list(corpus.named_paths().values())
    if args.input is not None:
        paths.append(read_waypoints(args.input))
    kernel = _kernel(args)
    ok = True
    with _open_output(args.output) as out:
        for report in verify.run_suite(args.suite, kernel, paths):
            ok &= report.passed
            out.write(report.to_json() + "\n")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


COMMANDS = {
    "smooth": cmd_smooth,
    "curvature": cmd_curvature,
    "select-epsilon": cmd_select_epsilon,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"mollipath: error: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMS
    except InputFormatError as exc:
        print(f"mollipath: malformed input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except KernelConstructionError as exc:
        print(f"mollipath: error: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMS


if __name__ == "__main__":
    sys.exit(main())
