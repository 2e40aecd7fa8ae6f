"""Continuous curve math: arc/circle parameters and chord-tolerance sampling.

Curves here live in real 2D coordinates.  An arc is given by three on-curve
points (start, mid, end); a circle by four on-curve points.  Polylines keep
their exact input endpoints so that adjacent curves chain without seams.
"""

from __future__ import annotations

import math

import numpy as np

Point = tuple[float, float]

# an arc whose circumradius exceeds this many bounding-box diagonals is
# treated as a straight segment
_STRAIGHT_RATIO = 1e4


def arc_params(s: Point, m: Point, e: Point) -> tuple[Point, float, float, float]:
    """Circle through three points plus the signed sweep from start to end.

    Returns (center, radius, start_angle, sweep); sweep is positive when the
    arc runs counterclockwise through the mid point, negative otherwise.
    Raises ValueError when the points are collinear (no finite center).
    """
    ax, ay = s
    bx, by = m
    cx, cy = e
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        raise ValueError("collinear arc points have no circumcenter")
    ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay)
          + (cx * cx + cy * cy) * (ay - by)) / d
    uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx)
          + (cx * cx + cy * cy) * (bx - ax)) / d
    center = (ux, uy)
    radius = math.dist(center, s)
    a0 = math.atan2(ay - uy, ax - ux)
    am = math.atan2(by - uy, bx - ux)
    a1 = math.atan2(cy - uy, cx - ux)
    ccw_mid = (am - a0) % (2 * math.pi)
    ccw_end = (a1 - a0) % (2 * math.pi)
    if ccw_mid <= ccw_end:
        sweep = ccw_end
    else:
        sweep = ccw_end - 2 * math.pi
    return center, radius, a0, sweep


def is_straight(s: Point, m: Point, e: Point) -> bool:
    """True when three arc points are numerically collinear."""
    ax, ay = s
    bx, by = m
    cx, cy = e
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        return True
    xs = (ax, bx, cx)
    ys = (ay, by, cy)
    diag = math.hypot(max(xs) - min(xs), max(ys) - min(ys))
    _, radius, _, _ = arc_params(s, m, e)
    return radius > _STRAIGHT_RATIO * diag


def circle_params(pts: list[Point]) -> tuple[Point, float]:
    """Best-fit circle through on-curve points: centroid center, mean radius."""
    arr = np.asarray(pts, dtype=np.float64)
    center = arr.mean(axis=0)
    radius = float(np.sqrt(((arr - center) ** 2).sum(axis=1)).mean())
    return (float(center[0]), float(center[1])), radius


def _segments_for(radius: float, sweep: float, tol: float) -> int:
    """Smallest segment count whose chords deviate from the arc by <= tol.

    The chord of a segment spanning angle t sags radius*(1 - cos(t/2)), so
    t <= 2*acos(1 - tol/radius).
    """
    if radius <= tol:
        return 1
    step = 2.0 * math.acos(max(-1.0, min(1.0, 1.0 - tol / radius)))
    if step <= 0:
        return 1
    return max(1, math.ceil(abs(sweep) / step))


def discretize_arc(s: Point, m: Point, e: Point, tol: float) -> list[Point]:
    """Sample an arc into a polyline within chord tolerance tol.

    Collinear inputs degrade to the straight segment [s, e].  The returned
    polyline starts exactly at s and ends exactly at e.
    """
    if is_straight(s, m, e):
        return [s, e]
    center, radius, a0, sweep = arc_params(s, m, e)
    n = _segments_for(radius, sweep, tol)
    pts = [s]
    for i in range(1, n):
        a = a0 + sweep * (i / n)
        pts.append((center[0] + radius * math.cos(a), center[1] + radius * math.sin(a)))
    pts.append(e)
    return pts


def discretize_circle(pts: list[Point], tol: float) -> list[Point]:
    """Sample a full circle into a closed ring (last point not repeated).

    The ring starts at the angle of the first input point and runs
    counterclockwise; at least 8 segments are used regardless of tolerance.
    """
    center, radius = circle_params(pts)
    n = max(8, _segments_for(radius, 2 * math.pi, tol))
    a0 = math.atan2(pts[0][1] - center[1], pts[0][0] - center[0])
    ring = []
    for i in range(n):
        a = a0 + 2 * math.pi * (i / n)
        ring.append((center[0] + radius * math.cos(a), center[1] + radius * math.sin(a)))
    return ring


def circle_segment_count(radius: float, tol: float) -> int:
    """Segment count discretize_circle uses for a circle of this radius."""
    return max(8, _segments_for(radius, 2 * math.pi, tol))


def loop_to_ring(curves: list[tuple[str, list[Point]]], tol: float) -> list[Point]:
    """Polygonize a closed loop of chained curves into one ring.

    Each curve contributes its polyline minus the final point, which the
    next curve supplies; a circle loop is its own ring.
    """
    if len(curves) == 1 and curves[0][0] == "circle":
        return discretize_circle(curves[0][1], tol)
    ring: list[Point] = []
    for kind, pts in curves:
        if kind == "line":
            poly = [pts[0], pts[1]]
        elif kind == "arc":
            poly = discretize_arc(pts[0], pts[1], pts[2], tol)
        else:
            raise ValueError("a circle cannot chain with other curves")
        ring.extend(poly[:-1])
    return ring
