"""Boolean combination of step solids by pointwise classification.

The composed shape is never meshed.  Instead, candidate points drawn from
each step's boundary are classified against the whole Boolean expression;
the points whose final class is "on the surface" are exactly the boundary
samples of the composed solid.
"""

from __future__ import annotations

import numpy as np

from .errors import EmptyResult
from .solid import StepSolid, TriMesh, classify_points, extrude_step, sample_mesh_surface

# classes: +1 inside, 0 on surface, -1 outside
_MAX_ROUNDS = 16


def classify_composed_batch(
    solids: list[StepSolid], pts: np.ndarray, tol: float = 1e-9
) -> np.ndarray:
    """Classify (N,3) points against the left-associative Boolean chain.

    Each step's own operation folds it into the running result: union is
    max, intersection min, and subtraction min with the negated class (which
    swaps inside and outside while keeping the surface).
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    acc = np.full(len(pts), -1, dtype=np.int8)  # empty solid; first step unions in
    for s in solids:
        c = classify_points(s, pts, tol)
        if s.boolean == "U":
            acc = np.maximum(acc, c)
        elif s.boolean == "I":
            acc = np.minimum(acc, c)
        else:
            acc = np.minimum(acc, -c)
    return acc


def classify_composed(solids: list[StepSolid], pt, tol: float = 1e-9) -> int:
    if not solids:
        return -1
    return int(classify_composed_batch(solids, np.asarray([pt]), tol)[0])


def csg_surface_sample(
    solids: list[StepSolid],
    n: int,
    rng: np.random.Generator,
    tol: float = 1e-9,
    max_rounds: int = _MAX_ROUNDS,
) -> np.ndarray:
    """Draw n points on the surface of the composed solid.

    Candidates are sampled area-weighted on every step's mesh and kept when
    the full Boolean chain classifies them as on-surface.  Raises EmptyResult
    when repeated rounds retain nothing (e.g. a subtraction that removes the
    whole shape); if something was retained but fewer than n points, the
    retained set is resampled with replacement to exactly n.
    """
    if not solids:
        raise EmptyResult("no steps to sample")
    meshes = [extrude_step(s) for s in solids]
    kept: list[np.ndarray] = []
    total = 0
    batch = max(n, 512)
    for _ in range(max_rounds):
        for mesh in meshes:
            pts = sample_mesh_surface(mesh, batch, rng)
            good = classify_composed_batch(solids, pts, tol) == 0
            if good.any():
                kept.append(pts[good])
                total += int(good.sum())
        if total >= n:
            break
    if total == 0:
        raise EmptyResult("Boolean combination has no sampleable surface")
    out = np.vstack(kept)
    if len(out) >= n:
        return out[:n]
    idx = rng.choice(len(out), size=n, replace=True)
    return out[idx]


def composed_meshes(solids: list[StepSolid]) -> list[TriMesh]:
    """World-space meshes of the individual steps (preview geometry)."""
    return [extrude_step(s) for s in solids]
