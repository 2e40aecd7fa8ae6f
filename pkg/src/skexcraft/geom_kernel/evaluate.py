"""Bridge from the quantized construction-sequence model to real geometry.

Grid points dequantize to bin centers in the unit square; the extrude
parameters place each sketch in world space as

    world = R @ (scale about center applied in-plane, lifted to z) + t

with the in-plane scaling applied to curve control points before
polygonization so arcs stay arcs.
"""

from __future__ import annotations

import numpy as np

from ..seq_core import (
    Curve,
    ExtrudeParams,
    ModelSE,
    Sketch,
    dequantize_coord,
    dequantize_point,
    dequantize_scale,
    dequantize_signed,
)
from .csg import csg_surface_sample
from .export import meshes_to_obj, sketch_to_svg
from .region import DEFAULT_CHORD_TOL, FaceRegion, face_region
from .solid import StepSolid, TriMesh, extrude_step


def _curve_points(c: Curve) -> list[tuple[float, float]]:
    return [dequantize_point(p) for p in c.points]


def _scaled(pts, center, factor):
    cx, cy = center
    return [(cx + factor * (x - cx), cy + factor * (y - cy)) for x, y in pts]


def _loop_spec(loop, center, factor):
    return [(c.kind, _scaled(_curve_points(c), center, factor)) for c in loop.curves]


def step_solid(sketch: Sketch, ext: ExtrudeParams, tol: float = DEFAULT_CHORD_TOL) -> StepSolid:
    """Evaluate one (sketch, extrude) step into a placed solid."""
    center = (dequantize_coord(ext.scale[0]), dequantize_coord(ext.scale[1]))
    factor = dequantize_scale(ext.scale[2])
    regions = [
        face_region(
            _loop_spec(f.outer, center, factor),
            [_loop_spec(h, center, factor) for h in f.holes],
            tol,
        )
        for f in sketch.faces
    ]
    top = dequantize_signed(ext.heights[0])
    bottom = dequantize_signed(ext.heights[1])
    lo, hi = min(top, bottom), max(top, bottom)
    rotation = np.asarray(ext.rotation, dtype=np.float64).reshape(3, 3)
    translation = np.asarray([dequantize_signed(b) for b in ext.translation])
    return StepSolid(regions, lo, hi, rotation, translation, ext.boolean)


def evaluate_model(model: ModelSE, tol: float = DEFAULT_CHORD_TOL) -> list[StepSolid]:
    return [step_solid(s, e, tol) for s, e in model.steps]


def model_meshes(model: ModelSE, tol: float = DEFAULT_CHORD_TOL) -> list[TriMesh]:
    return [extrude_step(s) for s in evaluate_model(model, tol)]


def model_to_obj(model: ModelSE, tol: float = DEFAULT_CHORD_TOL) -> str:
    return meshes_to_obj(model_meshes(model, tol))


def sketch_pixel_curves(sketch: Sketch) -> list[tuple[str, list[tuple[float, float]]]]:
    """Sketch curves in 0..64 pixel coordinates (bin centers), for rendering."""
    out = []
    for f in sketch.faces:
        for loop in f.loops():
            for c in loop.curves:
                out.append((c.kind, [(x * 64.0, y * 64.0) for x, y in _curve_points(c)]))
    return out


def model_to_svgs(model: ModelSE) -> list[str]:
    """One SVG document per step's sketch."""
    return [sketch_to_svg(sketch_pixel_curves(s)) for s, _ in model.steps]


def sample_model_surface(
    model: ModelSE,
    n: int,
    rng: np.random.Generator,
    tol: float = DEFAULT_CHORD_TOL,
) -> np.ndarray:
    """n points on the surface of the Boolean-composed model."""
    return csg_surface_sample(evaluate_model(model, tol), n, rng)
