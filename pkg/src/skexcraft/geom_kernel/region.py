"""Planar face regions: polygonized loops, even-odd membership, areas."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curves import Point, loop_to_ring

DEFAULT_CHORD_TOL = 1e-3

LoopSpec = list[tuple[str, list[Point]]]


@dataclass
class FaceRegion:
    """One face as polygon rings: an outer ring and zero or more hole rings.

    Rings are (N,2) float arrays, closed implicitly (last connects to first).
    The outer ring is counterclockwise, holes clockwise.
    """

    outer: np.ndarray
    holes: list[np.ndarray] = field(default_factory=list)

    def rings(self) -> list[np.ndarray]:
        return [self.outer, *self.holes]


def ring_area(ring: np.ndarray) -> float:
    """Signed shoelace area; positive for counterclockwise rings."""
    ring = np.asarray(ring, dtype=np.float64)
    x = ring[:, 0]
    y = ring[:, 1]
    return float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _oriented(ring: list[Point], ccw: bool) -> np.ndarray:
    arr = np.asarray(ring, dtype=np.float64)
    if (ring_area(arr) > 0) != ccw:
        arr = arr[::-1].copy()
    return arr


def face_region(outer: LoopSpec, holes: list[LoopSpec] = (), tol: float = DEFAULT_CHORD_TOL) -> FaceRegion:
    """Polygonize one face's loops into a FaceRegion within chord tolerance."""
    o = _oriented(loop_to_ring(outer, tol), ccw=True)
    hs = [_oriented(loop_to_ring(h, tol), ccw=False) for h in holes]
    return FaceRegion(o, hs)


def face_area(region: FaceRegion) -> float:
    """Area of the face: outer area minus hole areas."""
    a = abs(ring_area(region.outer))
    for h in region.holes:
        a -= abs(ring_area(h))
    return a


def _ring_edges(rings: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """All boundary edges of a ring collection as (starts (E,2), ends (E,2))."""
    a = []
    b = []
    for ring in rings:
        arr = np.asarray(ring, dtype=np.float64)
        a.append(arr)
        b.append(np.roll(arr, -1, axis=0))
    return np.vstack(a), np.vstack(b)


def points_in_rings(pts: np.ndarray, rings: list[np.ndarray]) -> np.ndarray:
    """Even-odd membership of (N,2) points over a collection of rings."""
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    a, b = _ring_edges(rings)
    x = pts[:, 0][:, None]
    y = pts[:, 1][:, None]
    y0 = a[None, :, 1]
    y1 = b[None, :, 1]
    crosses = (y0 > y) != (y1 > y)
    dy = np.where(y1 == y0, 1.0, y1 - y0)
    xi = a[None, :, 0] + (y - y0) * (b[None, :, 0] - a[None, :, 0]) / dy
    hits = crosses & (x < xi)
    return (hits.sum(axis=1) % 2).astype(bool)


def point_in_rings(pt: Point, rings: list[np.ndarray]) -> bool:
    """Even-odd membership over a collection of rings."""
    return bool(points_in_rings(np.asarray([pt]), rings)[0])


def point_in_face(pt: Point, region: FaceRegion) -> bool:
    """True when pt is inside the outer ring and outside every hole."""
    return point_in_rings(pt, region.rings())


def rings_signed_distance(pts: np.ndarray, rings: list[np.ndarray]) -> np.ndarray:
    """Signed distance of (N,2) points to the region boundary.

    Negative inside (even-odd), positive outside, zero on the boundary.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    a, b = _ring_edges(rings)
    d = b - a
    L2 = (d * d).sum(axis=1)
    L2 = np.where(L2 == 0, 1.0, L2)
    rel = pts[:, None, :] - a[None, :, :]
    t = np.clip((rel * d[None, :, :]).sum(axis=2) / L2[None, :], 0.0, 1.0)
    proj = a[None, :, :] + t[:, :, None] * d[None, :, :]
    dist = np.sqrt(((pts[:, None, :] - proj) ** 2).sum(axis=2)).min(axis=1)
    inside = points_in_rings(pts, rings)
    return np.where(inside, -dist, dist)


def ring_signed_distance(pt: Point, rings: list[np.ndarray]) -> float:
    """Signed distance to the region boundary: negative inside, positive outside."""
    return float(rings_signed_distance(np.asarray([pt]), rings)[0])
