"""Extrusion of planar regions into triangle meshes and point classification.

A step solid is one or more face regions swept along the local z axis
between two planes, then rigidly placed in world space (rotation followed by
translation).  Meshes are watertight: caps come from the region
triangulation, walls from the same polygon rings, and vertices are merged by
exact coordinate equality, so every edge is shared by exactly two triangles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ZeroHeight
from .region import (
    FaceRegion,
    face_area,
    point_in_rings,
    rings_signed_distance,
)
from .triangulate import triangulate

# half-width of the "on surface" band for 3-way point classification
ON_SURFACE_TOL = 1e-9

IDENTITY3 = np.eye(3, dtype=np.float64)


@dataclass
class TriMesh:
    vertices: np.ndarray  # (N,3) float64
    faces: np.ndarray  # (M,3) int64, counterclockwise outward


@dataclass
class StepSolid:
    """One extruded sketch in world space.

    regions are in local sketch coordinates (any 2D scaling already applied);
    the solid occupies lo <= z <= hi locally and is placed in world space as
    world = rotation @ local + translation.
    """

    regions: list[FaceRegion]
    lo: float
    hi: float
    rotation: np.ndarray = field(default_factory=lambda: IDENTITY3.copy())
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    boolean: str = "U"

    def to_local(self, pts: np.ndarray) -> np.ndarray:
        return (np.asarray(pts, dtype=np.float64) - self.translation) @ self.rotation

    def to_world(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(pts, dtype=np.float64) @ self.rotation.T + self.translation


def _dedup_vertices(verts: np.ndarray, faces: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Merge vertices with exactly equal coordinates; drop unused ones."""
    keys = [tuple(v) for v in verts]
    index: dict[tuple, int] = {}
    remap = np.empty(len(verts), dtype=np.int64)
    merged = []
    for i, k in enumerate(keys):
        j = index.get(k)
        if j is None:
            j = len(merged)
            index[k] = j
            merged.append(verts[i])
        remap[i] = j
    return np.asarray(merged), remap[faces]


def extrude_region(region: FaceRegion, lo: float, hi: float) -> TriMesh:
    """Sweep one face region along local z from lo to hi into a closed mesh."""
    if hi < lo:
        lo, hi = hi, lo
    if hi - lo < 1e-12:
        raise ZeroHeight("extrusion planes coincide")
    v2, tris = triangulate(region)
    nv = len(v2)
    bottom = np.column_stack([v2, np.full(nv, lo)])
    top = np.column_stack([v2, np.full(nv, hi)])
    verts = [bottom, top]
    faces = []
    # caps: top keeps the CCW triangles (+z normal), bottom flips (-z)
    faces.extend((t[0], t[2], t[1]) for t in tris)
    faces.extend((nv + t[0], nv + t[1], nv + t[2]) for t in tris)
    # walls from the original rings (outer CCW, holes CW: both face outward)
    base = 2 * nv
    for ring in region.rings():
        arr = np.asarray(ring, dtype=np.float64)
        n = len(arr)
        rb = np.column_stack([arr, np.full(n, lo)])
        rt = np.column_stack([arr, np.full(n, hi)])
        verts.extend([rb, rt])
        for i in range(n):
            a, b = i, (i + 1) % n
            faces.append((base + a, base + b, base + n + b))
            faces.append((base + a, base + n + b, base + n + a))
        base += 2 * n
    V = np.vstack(verts)
    F = np.asarray(faces, dtype=np.int64)
    V, F = _dedup_vertices(V, F)
    return TriMesh(V, F)


def extrude_step(solid: StepSolid) -> TriMesh:
    """Mesh a whole step (all faces) in world coordinates."""
    meshes = [extrude_region(r, solid.lo, solid.hi) for r in solid.regions]
    verts = []
    faces = []
    off = 0
    for m in meshes:
        verts.append(solid.to_world(m.vertices))
        faces.append(m.faces + off)
        off += len(m.vertices)
    return TriMesh(np.vstack(verts), np.vstack(faces))


def solids_signed_distance(solid: StepSolid, pts: np.ndarray) -> np.ndarray:
    """Conservative signed distance of (N,3) points: negative inside.

    Combines the slab distance along z with the planar boundary distance the
    way an axis-aligned box does; the sign is exact everywhere and the value
    is exactly zero on the surface, merely conservative near convex edges.
    """
    local = solid.to_local(np.atleast_2d(np.asarray(pts, dtype=np.float64)))
    z = local[:, 2]
    dz = np.maximum(solid.lo - z, z - solid.hi)
    dxy = np.min(
        [rings_signed_distance(local[:, :2], r.rings()) for r in solid.regions],
        axis=0,
    )
    return np.maximum(dxy, dz)


def solid_signed_distance(solid: StepSolid, pt) -> float:
    return float(solids_signed_distance(solid, np.asarray([pt]))[0])


def classify_points(solid: StepSolid, pts: np.ndarray, tol: float = ON_SURFACE_TOL) -> np.ndarray:
    """3-way classification of (N,3) points: +1 inside, 0 on, -1 outside."""
    d = solids_signed_distance(solid, pts)
    return np.where(d < -tol, 1, np.where(d > tol, -1, 0)).astype(np.int8)


def classify_point(solid: StepSolid, pt, tol: float = ON_SURFACE_TOL) -> int:
    """3-way classification: +1 inside, 0 on the surface, -1 outside."""
    return int(classify_points(solid, np.asarray([pt]), tol)[0])


def point_in_solid(solid: StepSolid, pt) -> bool:
    """Strict membership via inverse placement and even-odd region tests."""
    local = solid.to_local(np.asarray(pt, dtype=np.float64))
    if not (solid.lo <= local[2] <= solid.hi):
        return False
    p2 = (local[0], local[1])
    return any(point_in_rings(p2, r.rings()) for r in solid.regions)


def solid_area(solid: StepSolid) -> float:
    """Total footprint area of the step's regions."""
    return sum(face_area(r) for r in solid.regions)


def mesh_area(mesh: TriMesh) -> float:
    v = mesh.vertices
    f = mesh.faces
    a = v[f[:, 1]] - v[f[:, 0]]
    b = v[f[:, 2]] - v[f[:, 0]]
    return float(0.5 * np.linalg.norm(np.cross(a, b), axis=1).sum())


def mesh_volume(mesh: TriMesh) -> float:
    """Signed volume via the divergence theorem; positive for outward normals."""
    v = mesh.vertices
    f = mesh.faces
    return float(np.einsum("ij,ij->i", v[f[:, 0]], np.cross(v[f[:, 1]], v[f[:, 2]])).sum() / 6.0)


def sample_mesh_surface(mesh: TriMesh, n: int, rng: np.random.Generator) -> np.ndarray:
    """Area-weighted uniform sampling of n points on a mesh surface."""
    v = mesh.vertices
    f = mesh.faces
    a = v[f[:, 1]] - v[f[:, 0]]
    b = v[f[:, 2]] - v[f[:, 0]]
    areas = 0.5 * np.linalg.norm(np.cross(a, b), axis=1)
    total = areas.sum()
    if total <= 0:
        raise ValueError("mesh has no surface area")
    tri = rng.choice(len(f), size=n, p=areas / total)
    # uniform barycentric coordinates via the square-root trick
    r1 = np.sqrt(rng.random(n))
    r2 = rng.random(n)
    w0 = 1.0 - r1
    w1 = r1 * (1.0 - r2)
    w2 = r1 * r2
    return (
        w0[:, None] * v[f[tri, 0]]
        + w1[:, None] * v[f[tri, 1]]
        + w2[:, None] * v[f[tri, 2]]
    )
