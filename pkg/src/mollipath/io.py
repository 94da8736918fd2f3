"""Waypoint input parsing and CSV/JSON output with a reproducibility header."""

from __future__ import annotations

import csv
import io
import json
import platform
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy

from .polyline import Polyline

__all__ = ["InputFormatError", "RunManifest", "parse_waypoints", "read_waypoints",
           "format_float", "write_csv", "waypoints_csv"]

FLOAT_FORMAT = "%.17g"


class InputFormatError(ValueError):
    """The waypoint file could not be parsed."""


def format_float(x) -> str:
    return FLOAT_FORMAT % float(x)


def _versions():
    from . import __version__

    return {"mollipath": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


@dataclass
class RunManifest:
    command: str
    input: str | None = None
    method: str | None = None
    eps: float | None = None
    gamma: float | None = None
    samples: int | None = None
    kernel_tol: float | None = None
    output: str | None = None
    seed: int | None = None
    extra: dict = field(default_factory=dict)
    versions: dict = field(default_factory=_versions)

    def to_dict(self):
        return asdict(self)

    def header_line(self) -> str:
        return "# " + json.dumps(self.to_dict(), sort_keys=True)


def _parse_json(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or "waypoints" not in doc:
        raise InputFormatError('JSON input needs an object with a "waypoints" list')
    pts = doc["waypoints"]
    if not isinstance(pts, list) or not all(isinstance(p, list) for p in pts):
        raise InputFormatError('"waypoints" must be a list of coordinate lists')
    lengths = {len(p) for p in pts}
    if len(lengths) > 1:
        raise InputFormatError("waypoints have inconsistent dimensions")
    dim = doc.get("dimension")
    if dim is not None and lengths and lengths != {dim}:
        raise InputFormatError(f"declared dimension {dim} does not match waypoints")
    try:
        return np.array(pts, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputFormatError(f"non-numeric waypoint: {exc}") from None


def _parse_csv(text):
    rows = [r for r in csv.reader(io.StringIO(text))
            if r and not r[0].lstrip().startswith("#") and any(c.strip() for c in r)]
    if rows and all(c.strip().startswith("x") for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        if header != [f"x{i}" for i in range(len(header))]:
            raise InputFormatError(f"unexpected CSV header {header}")
        rows = rows[1:]
    if len({len(r) for r in rows}) > 1:
        raise InputFormatError("CSV rows have inconsistent lengths")
    try:
        return np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise InputFormatError(f"non-numeric CSV field: {exc}") from None


def parse_waypoints(text: str) -> Polyline:
    """Parse JSON ``{"dimension": n, "waypoints": [...]}`` or CSV text."""
    stripped = text.lstrip()
    pts = _parse_json(text) if stripped.startswith("{") else _parse_csv(text)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise InputFormatError("no waypoints found")
    try:
        return Polyline(pts)
    except ValueError as exc:
        raise InputFormatError(str(exc)) from None


def read_waypoints(path: str) -> Polyline:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputFormatError(f"cannot read {path}: {exc.strerror}") from None
    return parse_waypoints(text)


def write_csv(stream, header, rows, manifest: RunManifest | None = None):
    """Write a manifest comment line, a header and ``%.17g`` rows."""
    if manifest is not None:
        stream.write(manifest.header_line() + "\n")
    stream.write(",".join(header) + "\n")
    for row in np.atleast_2d(np.asarray(rows, dtype=float)):
        stream.write(",".join(format_float(v) for v in row) + "\n")


def waypoints_csv(pl: Polyline, manifest: RunManifest | None = None) -> str:
    buf = io.StringIO()
    write_csv(buf, [f"x{i}" for i in range(pl.dimension)], pl.waypoints, manifest)
    return buf.getvalue()
