"""SVG sketch rendering and OBJ mesh export.

SVG uses the 64x64 pixel frame of the sketch grid with y up, so drawings
are emitted with a y flip.  Curve kinds are color-coded: lines black, arcs
green, circles red.
"""

from __future__ import annotations

import math

from .curves import Point, arc_params, circle_params, is_straight
from .solid import TriMesh

SVG_SIZE = 64

_COLORS = {"line": "#000000", "arc": "#007f00", "circle": "#cc0000"}


def _fmt(v: float) -> str:
    return f"{v:.4f}".rstrip("0").rstrip(".")


def _flip(p: Point) -> Point:
    return (p[0], SVG_SIZE - p[1])


def _line_path(pts: list[Point]) -> str:
    a, b = _flip(pts[0]), _flip(pts[1])
    return f"M {_fmt(a[0])} {_fmt(a[1])} L {_fmt(b[0])} {_fmt(b[1])}"


def _arc_path(pts: list[Point]) -> str:
    s, m, e = pts
    if is_straight(s, m, e):
        return _line_path([s, e])
    _, radius, _, sweep = arc_params(s, m, e)
    fs, fe = _flip(s), _flip(e)
    large = 1 if abs(sweep) > math.pi else 0
    # the y flip reverses the drawing direction: positive (counterclockwise)
    # sweeps use SVG sweep-flag 0
    flag = 0 if sweep > 0 else 1
    r = _fmt(radius)
    return (
        f"M {_fmt(fs[0])} {_fmt(fs[1])} "
        f"A {r} {r} 0 {large} {flag} {_fmt(fe[0])} {_fmt(fe[1])}"
    )


def sketch_to_svg(curves: list[tuple[str, list[Point]]], stroke_width: float = 0.5) -> str:
    """Render one sketch (curves in 0..64 pixel coordinates) as an SVG document."""
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">'
    ]
    for kind, pts in curves:
        color = _COLORS[kind]
        if kind == "circle":
            (cx, cy), r = circle_params(pts)
            fx, fy = _flip((cx, cy))
            parts.append(
                f'<circle cx="{_fmt(fx)}" cy="{_fmt(fy)}" r="{_fmt(r)}" '
                f'fill="none" stroke="{color}" stroke-width="{stroke_width}"/>'
            )
        else:
            d = _arc_path(pts) if kind == "arc" else _line_path(pts)
            parts.append(
                f'<path d="{d}" fill="none" stroke="{color}" '
                f'stroke-width="{stroke_width}"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts)


def meshes_to_obj(meshes: list[TriMesh]) -> str:
    """Serialize meshes as one Wavefront OBJ document (1-based indices)."""
    lines = []
    offset = 0
    for k, mesh in enumerate(meshes):
        lines.append(f"o step{k}")
        for v in mesh.vertices:
            lines.append(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}")
        for f in mesh.faces:
            lines.append(f"f {f[0] + 1 + offset} {f[1] + 1 + offset} {f[2] + 1 + offset}")
        offset += len(mesh.vertices)
    return "\n".join(lines) + "\n"
