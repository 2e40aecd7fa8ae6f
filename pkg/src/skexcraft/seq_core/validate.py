"""Semantic validation of sketch-and-extrude models.

validate() never raises; it returns a list of diagnostics, each carrying a
stable rule id, the path of the offending primitive and a severity.  Only
"error" diagnostics make a model invalid; "warning" ones flag numerically
fragile geometry that still evaluates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .grammar import _orientation_polygon, signed_area
from .quantize import dequantize_point
from .tokens import GRID, STORED_POINTS
from .types import Face, Loop, ModelSE

_AREA_EPS = 1e-12
_EDGE_EPS = 1e-9


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    path: str
    message: str
    severity: str = "error"


def _circumradius(p0, p1, p2) -> float:
    """Radius of the circle through three points; inf when collinear."""
    ax, ay = p0
    bx, by = p1
    cx, cy = p2
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(d) < 1e-300:
        return math.inf
    a = math.dist(p1, p2)
    b = math.dist(p0, p2)
    c = math.dist(p0, p1)
    area2 = abs(d) / 2.0
    return (a * b * c) / (2.0 * area2)


def _point_in_polygon(pt, poly) -> bool:
    """Even-odd membership; points on an edge count as inside."""
    x, y = pt
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        # distance to the segment, for boundary tolerance
        dx, dy = x1 - x0, y1 - y0
        L2 = dx * dx + dy * dy
        t = 0.0 if L2 == 0 else max(0.0, min(1.0, ((x - x0) * dx + (y - y0) * dy) / L2))
        if math.dist(pt, (x0 + t * dx, y0 + t * dy)) <= _EDGE_EPS:
            return True
    inside = False
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        if (y0 > y) != (y1 > y):
            xi = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if x < xi:
                inside = not inside
    return inside


def _check_curves(loop: Loop, path: str, out: list[Diagnostic]) -> bool:
    """Per-curve structural rules.  Returns False if later loop rules are moot."""
    ok = True
    for m, c in enumerate(loop.curves):
        cpath = f"{path}.curves[{m}]"
        want = STORED_POINTS[c.kind]
        if len(c.points) != want:
            out.append(
                Diagnostic(
                    "curve.point_count",
                    cpath,
                    f"{c.kind} stores {len(c.points)} points, needs {want}",
                )
            )
            ok = False
            continue
        for p in c.points:
            if not (0 <= p.x < GRID and 0 <= p.y < GRID):
                out.append(
                    Diagnostic(
                        "curve.point_range",
                        cpath,
                        f"point ({p.x},{p.y}) outside the {GRID}x{GRID} grid",
                    )
                )
                ok = False
                break
    return ok


def _check_loop(loop: Loop, path: str, out: list[Diagnostic]) -> None:
    if not loop.curves:
        out.append(Diagnostic("loop.empty", path, "loop has no curves"))
        return
    if not _check_curves(loop, path, out):
        return

    n_circle = sum(1 for c in loop.curves if c.kind == "circle")
    if n_circle and len(loop.curves) > 1:
        out.append(
            Diagnostic(
                "loop.circle_exclusive",
                path,
                "a circle must be the only curve in its loop",
            )
        )
        return

    for m, c in enumerate(loop.curves):
        cpath = f"{path}.curves[{m}]"
        if c.kind == "line" and c.start == c.end:
            out.append(Diagnostic("curve.degenerate", cpath, "zero-length line"))
        elif c.kind == "arc":
            if len(set(c.points)) < 3:
                out.append(Diagnostic("curve.degenerate", cpath, "arc with repeated points"))
            else:
                pts = [dequantize_point(p) for p in c.points]
                r = _circumradius(*pts)
                diag = math.dist(
                    (min(p[0] for p in pts), min(p[1] for p in pts)),
                    (max(p[0] for p in pts), max(p[1] for p in pts)),
                )
                if r > 1e4 * diag:
                    out.append(
                        Diagnostic(
                            "arc.collinear",
                            cpath,
                            "arc is numerically straight; it will evaluate as a line",
                            severity="warning",
                        )
                    )
        elif c.kind == "circle" and len(set(c.points)) < 3:
            out.append(Diagnostic("curve.degenerate", cpath, "circle collapses to a point"))

    if not loop.is_circle():
        for m, c in enumerate(loop.curves):
            nxt = loop.curves[(m + 1) % len(loop.curves)]
            if c.end != nxt.start:
                out.append(
                    Diagnostic(
                        "loop.not_closed",
                        f"{path}.curves[{m}]",
                        f"curve ends at ({c.end.x},{c.end.y}) but the next starts at"
                        f" ({nxt.start.x},{nxt.start.y})",
                    )
                )

    if any(d.path.startswith(path) and d.severity == "error" for d in out):
        return
    if abs(signed_area(_orientation_polygon(loop))) < _AREA_EPS:
        out.append(Diagnostic("loop.zero_area", path, "loop encloses no area"))


def _check_face(face: Face, path: str, out: list[Diagnostic]) -> None:
    _check_loop(face.outer, f"{path}.outer", out)
    outer_ok = not any(
        d.path.startswith(f"{path}.outer") and d.severity == "error" for d in out
    )
    outer_poly = _orientation_polygon(face.outer) if outer_ok else None
    for k, hole in enumerate(face.holes):
        hpath = f"{path}.holes[{k}]"
        _check_loop(hole, hpath, out)
        hole_ok = not any(d.path.startswith(hpath) and d.severity == "error" for d in out)
        if outer_poly and hole_ok:
            for p in hole.all_points():
                if not _point_in_polygon(dequantize_point(p), outer_poly):
                    out.append(
                        Diagnostic(
                            "face.hole_outside",
                            hpath,
                            "hole leaves the outer boundary of its face",
                        )
                    )
                    break


def validate(model: ModelSE) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    if not model.steps:
        out.append(Diagnostic("model.empty", "steps", "model has no steps"))
        return out
    for i, (sketch, ext) in enumerate(model.steps):
        spath = f"steps[{i}]"
        if not sketch.faces:
            out.append(Diagnostic("sketch.empty", f"{spath}.sketch", "sketch has no faces"))
        for j, face in enumerate(sketch.faces):
            _check_face(face, f"{spath}.sketch.faces[{j}]", out)

        epath = f"{spath}.extrude"
        for name, bins in (
            ("height", ext.heights),
            ("translation", ext.translation),
            ("scale", ext.scale),
        ):
            if any(not (0 <= b < GRID) for b in bins):
                out.append(
                    Diagnostic(
                        "extrude.bin_range", epath, f"{name} bin outside [0,{GRID - 1}]"
                    )
                )
        if any(v not in (-1, 0, 1) for v in ext.rotation):
            out.append(
                Diagnostic(
                    "extrude.rotation_entries", epath, "rotation entries must be -1, 0 or 1"
                )
            )
        else:
            r = ext.rotation
            rows = [r[0:3], r[3:6], r[6:9]]
            ortho = all(
                sum(rows[a][k] * rows[b][k] for k in range(3)) == (1 if a == b else 0)
                for a in range(3)
                for b in range(3)
            )
            det = (
                r[0] * (r[4] * r[8] - r[5] * r[7])
                - r[1] * (r[3] * r[8] - r[5] * r[6])
                + r[2] * (r[3] * r[7] - r[4] * r[6])
            )
            if not ortho or det != 1:
                out.append(
                    Diagnostic(
                        "extrude.rotation_orthogonal",
                        epath,
                        "rotation must be orthogonal with determinant +1",
                    )
                )
        if ext.heights[0] == ext.heights[1]:
            out.append(
                Diagnostic("extrude.zero_height", epath, "extrusion has zero thickness")
            )
        if i == 0 and ext.boolean != "U":
            out.append(
                Diagnostic(
                    "model.first_boolean_union",
                    epath,
                    "the first step must use the union operation",
                )
            )
    return out


def is_valid(model: ModelSE) -> bool:
    return not any(d.severity == "error" for d in validate(model))
