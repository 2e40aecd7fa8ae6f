"""Quantization maps between continuous values and 6-bit token bins.

Sketch coordinates live in the unit square; a sketch's true placement is
carried by the extrude scale/translation/rotation parameters.  Numeric
extrude bins use fixed affine maps chosen so that zero displacement and
unit scale are exactly representable:

  sketch coordinate  c in [0,1)   ->  bin = floor(c*64), value = (bin+0.5)/64
  signed value       v in [-1,1)  ->  bin = round(v*32)+32, value = (bin-32)/32
  scale factor       f in (0,2]   ->  bin = round(f*32)-1, value = (bin+1)/32
"""

from __future__ import annotations

import math

from .types import GridPoint, OutOfRange
from .tokens import GRID

_EPS = 1e-9


def quantize_coord(c: float) -> int:
    if c < -_EPS or c >= 1.0 + _EPS:
        raise OutOfRange(f"coordinate {c} outside [0,1)")
    return min(max(int(math.floor(c * GRID)), 0), GRID - 1)


def dequantize_coord(b: int) -> float:
    return (b + 0.5) / GRID


def quantize_point(p: tuple[float, float]) -> GridPoint:
    return GridPoint(quantize_coord(p[0]), quantize_coord(p[1]))


def dequantize_point(p: GridPoint) -> tuple[float, float]:
    return (dequantize_coord(p.x), dequantize_coord(p.y))


def quantize_signed(v: float) -> int:
    if v < -1.0 - _EPS or v > 1.0 + _EPS:
        raise OutOfRange(f"signed value {v} outside [-1,1]")
    return min(max(int(round(v * 32)) + 32, 0), GRID - 1)


def dequantize_signed(b: int) -> float:
    return (b - 32) / 32


def quantize_scale(f: float) -> int:
    if f <= 0 or f > 2.0 + _EPS:
        raise OutOfRange(f"scale factor {f} outside (0,2]")
    return min(max(int(round(f * 32)) - 1, 0), GRID - 1)


def dequantize_scale(b: int) -> float:
    return (b + 1) / 32
