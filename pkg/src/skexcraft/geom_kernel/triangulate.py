"""Ear-clipping triangulation of polygon regions with holes.

Holes are spliced into the outer ring through bridge edges (each bridge
duplicates its two endpoints), then the merged simple polygon is ear-clipped.
Degenerate (zero-area) ears are emitted rather than dropped so that cap
boundary edges always match side-wall edges one-to-one, which keeps extruded
meshes watertight by exact edge pairing.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import SelfIntersecting
from .region import FaceRegion, ring_area


def _proper_crossings(a0, a1, b0, b1, skip_adjacent_of=None):
    """Count proper interior crossings between two edge sets (vectorized).

    a0/a1: (E1,2) segment endpoints; b0/b1: (E2,2).  skip_adjacent_of=n masks
    pairs (i,j) of the same n-edge ring that share an endpoint.
    """

    def cross(o, d, p):
        # sign of (d-o) x (p-o); o,d broadcast against p
        return (d[..., 0] - o[..., 0]) * (p[..., 1] - o[..., 1]) - (
            d[..., 1] - o[..., 1]
        ) * (p[..., 0] - o[..., 0])

    A0 = a0[:, None, :]
    A1 = a1[:, None, :]
    B0 = b0[None, :, :]
    B1 = b1[None, :, :]
    d1 = cross(A0, A1, B0)
    d2 = cross(A0, A1, B1)
    d3 = cross(B0, B1, A0)
    d4 = cross(B0, B1, A1)
    proper = ((d1 > 0) != (d2 > 0)) & ((d3 > 0) != (d4 > 0))
    proper &= (d1 != 0) & (d2 != 0) & (d3 != 0) & (d4 != 0)
    if skip_adjacent_of is not None:
        n = skip_adjacent_of
        i = np.arange(n)[:, None]
        j = np.arange(n)[None, :]
        adjacent = (i == j) | ((i + 1) % n == j) | ((j + 1) % n == i)
        proper &= ~adjacent
    return int(proper.sum())


def check_simple(region: FaceRegion) -> None:
    """Raise SelfIntersecting when any ring crosses itself or another ring."""
    rings = region.rings()
    edge_sets = []
    for r in rings:
        arr = np.asarray(r, dtype=np.float64)
        edge_sets.append((arr, np.roll(arr, -1, axis=0)))
    for i, (a0, a1) in enumerate(edge_sets):
        if _proper_crossings(a0, a1, a0, a1, skip_adjacent_of=len(a0)):
            raise SelfIntersecting(f"ring {i} crosses itself")
        for j in range(i + 1, len(edge_sets)):
            b0, b1 = edge_sets[j]
            if _proper_crossings(a0, a1, b0, b1):
                raise SelfIntersecting(f"ring {i} crosses ring {j}")


def _point_in_triangle(px, py, ax, ay, bx, by, cx, cy) -> bool:
    """Inclusive point-in-triangle for a CCW or degenerate triangle."""
    d1 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    d2 = (cx - bx) * (py - by) - (cy - by) * (px - bx)
    d3 = (ax - cx) * (py - cy) - (ay - cy) * (px - cx)
    has_neg = (d1 < 0) or (d2 < 0) or (d3 < 0)
    has_pos = (d1 > 0) or (d2 > 0) or (d3 > 0)
    return not (has_neg and has_pos)


def _bridge_target(hole: list, poly: list) -> int:
    """Index into poly of a vertex visible from the hole's leftmost vertex.

    Casts a ray in -x from the hole vertex, takes the nearest crossed edge,
    then resolves blocking reflex vertices the way earcut does.
    """
    hx, hy = min(hole, key=lambda p: (p[0], p[1]))
    qx = -math.inf
    m = -1
    n = len(poly)
    for i in range(n):
        px, py = poly[i]
        nx, ny = poly[(i + 1) % n]
        if (py >= hy) != (ny >= hy) and ny != py:
            x = px + (hy - py) * (nx - px) / (ny - py)
            if x <= hx and x > qx:
                qx = x
                m = i if px < nx else (i + 1) % n
                if x == hx:
                    return m
    if m < 0:
        raise SelfIntersecting("hole has no visible bridge to the outer ring")
    # candidate may be blocked: pick the blocking reflex vertex with the
    # smallest angle to the ray (ties to the larger x)
    mx, my = poly[m]
    best = m
    tan_min = math.inf
    for i in range(n):
        px, py = poly[i]
        if not (mx <= px <= hx) or (px == hx) or (px, py) == (mx, my):
            continue
        if hy < my:
            inside = _point_in_triangle(px, py, hx, hy, mx, my, qx, hy)
        else:
            inside = _point_in_triangle(px, py, qx, hy, mx, my, hx, hy)
        if inside:
            tan = abs(hy - py) / (hx - px) if hx != px else math.inf
            if tan < tan_min or (tan == tan_min and px > poly[best][0]):
                best = i
                tan_min = tan
    return best


def _merge_holes(outer: list, holes: list[list]) -> list:
    poly = list(outer)
    # process holes left to right so earlier bridges cannot occlude later ones
    for hole in sorted(holes, key=lambda h: min(p[0] for p in h)):
        k = _bridge_target(hole, poly)
        lm = min(range(len(hole)), key=lambda i: (hole[i][0], hole[i][1]))
        rot = hole[lm:] + hole[:lm]
        poly = poly[: k + 1] + rot + [rot[0], poly[k]] + poly[k + 1 :]
    return poly


def _ear_clip(poly: list) -> list[tuple[int, int, int]]:
    n = len(poly)
    idx = list(range(n))
    tris: list[tuple[int, int, int]] = []
    guard = 0
    i = 0
    while len(idx) > 3:
        if guard > 2 * len(idx):
            raise SelfIntersecting("no ear found; boundary is not a simple polygon")
        i %= len(idx)
        ia, ib, ic = idx[i - 1], idx[i], idx[(i + 1) % len(idx)]
        ax, ay = poly[ia]
        bx, by = poly[ib]
        cx, cy = poly[ic]
        cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if cross < 0:
            i += 1
            guard += 1
            continue
        blocked = False
        for j in idx:
            if j in (ia, ib, ic):
                continue
            px, py = poly[j]
            if (px, py) in ((ax, ay), (bx, by), (cx, cy)):
                continue
            if _point_in_triangle(px, py, ax, ay, bx, by, cx, cy):
                blocked = True
                break
        if blocked:
            i += 1
            guard += 1
            continue
        tris.append((ia, ib, ic))
        del idx[i]
        guard = 0
    tris.append((idx[0], idx[1], idx[2]))
    return tris


def triangulate(region: FaceRegion) -> tuple[np.ndarray, np.ndarray]:
    """Triangulate a face region.

    Returns (vertices (N,2), triangles (M,3) of vertex indices); triangles
    are counterclockwise.  Bridge vertices appear twice in the vertex array.
    Raises SelfIntersecting for crossing boundaries.
    """
    check_simple(region)
    outer = [tuple(p) for p in np.asarray(region.outer)]
    if ring_area(np.asarray(outer)) < 0:
        outer = outer[::-1]
    holes = []
    for h in region.holes:
        hh = [tuple(p) for p in np.asarray(h)]
        if ring_area(np.asarray(hh)) > 0:
            hh = hh[::-1]
        holes.append(hh)
    merged = _merge_holes(outer, holes)
    tris = _ear_clip(merged)
    verts = np.asarray(merged, dtype=np.float64)
    return verts, np.asarray(tris, dtype=np.int64)
