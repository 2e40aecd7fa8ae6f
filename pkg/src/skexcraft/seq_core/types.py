"""Sketch-and-extrude data model and its native JSON form.

All values are immutable after construction.  Constructors only enforce
structural well-formedness (field shapes); semantic rules such as loop
closure or rotation orthogonality are the validator's job so that invalid
models can still be built and inspected in tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

from .tokens import BOOLEAN_OPS, CURVE_KINDS, STORED_POINTS

JSON_VERSION = 1


class SeqError(Exception):
    """Base class for sequence-layer errors."""


class InvalidModel(SeqError):
    """A model failed validation where a valid one was required."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        rules = ", ".join(d.rule for d in self.diagnostics) or "unknown"
        super().__init__(f"invalid model: {rules}")


class MalformedSequence(SeqError):
    """A token sequence violates the construction grammar."""


class BadCurveArity(MalformedSequence):
    """A curve's geometry-token run has length outside {1, 2, 4}."""


class CountMismatch(SeqError):
    """Sketch count and extrude-block count disagree."""


class OutOfRange(SeqError):
    """A coordinate is outside the quantizable range."""


@dataclass(frozen=True, order=True)
class GridPoint:
    """Pixel coordinate on the 64x64 sketch grid."""

    x: int
    y: int

    def key(self) -> tuple[int, int]:
        """Ordering key used for canonical loop starts: (y, x)."""
        return (self.y, self.x)


@dataclass(frozen=True)
class Curve:
    kind: str  # line | arc | circle
    points: tuple[GridPoint, ...]  # line: (start, end); arc: (start, mid, end); circle: 4

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise ValueError(f"unknown curve kind {self.kind!r}")
        object.__setattr__(self, "points", tuple(self.points))

    @property
    def start(self) -> GridPoint:
        return self.points[0]

    @property
    def end(self) -> GridPoint:
        return self.points[-1]

    def reversed(self) -> "Curve":
        if self.kind == "circle":
            p = self.points
            return Curve("circle", (p[0], p[3], p[2], p[1]))
        return Curve(self.kind, tuple(reversed(self.points)))


@dataclass(frozen=True)
class Loop:
    curves: tuple[Curve, ...]

    def __post_init__(self):
        object.__setattr__(self, "curves", tuple(self.curves))

    def is_circle(self) -> bool:
        return len(self.curves) == 1 and self.curves[0].kind == "circle"

    def all_points(self) -> list[GridPoint]:
        return [p for c in self.curves for p in c.points]


@dataclass(frozen=True)
class Face:
    outer: Loop
    holes: tuple[Loop, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "holes", tuple(self.holes))

    def loops(self) -> tuple[Loop, ...]:
        return (self.outer, *self.holes)


@dataclass(frozen=True)
class Sketch:
    faces: tuple[Face, ...]

    def __post_init__(self):
        object.__setattr__(self, "faces", tuple(self.faces))


@dataclass(frozen=True)
class ExtrudeParams:
    """Extrusion parameter block, all numeric values as 6-bit bins.

    heights: (top, bottom) displacement bins along the extrusion normal.
    rotation: 9 entries in {-1, 0, 1}, row-major 3x3 matrix.
    translation: 3 bins.
    scale: (center-x bin, center-y bin, factor bin); the center is a 2D
    sketch coordinate and the factor is uniform.
    boolean: "U" | "I" | "S".
    """

    heights: tuple[int, int]
    rotation: tuple[int, ...]
    translation: tuple[int, int, int]
    scale: tuple[int, int, int]
    boolean: str

    def __post_init__(self):
        object.__setattr__(self, "heights", tuple(self.heights))
        object.__setattr__(self, "rotation", tuple(self.rotation))
        object.__setattr__(self, "translation", tuple(self.translation))
        object.__setattr__(self, "scale", tuple(self.scale))
        if len(self.heights) != 2:
            raise ValueError("heights must have 2 entries")
        if len(self.rotation) != 9:
            raise ValueError("rotation must have 9 entries")
        if len(self.translation) != 3:
            raise ValueError("translation must have 3 entries")
        if len(self.scale) != 3:
            raise ValueError("scale must have 3 entries")
        if self.boolean not in BOOLEAN_OPS:
            raise ValueError(f"unknown boolean op {self.boolean!r}")


@dataclass(frozen=True)
class ModelSE:
    """A sketch-and-extrude model: an ordered list of (sketch, extrude) steps."""

    steps: tuple[tuple[Sketch, ExtrudeParams], ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(tuple(s) for s in self.steps))

    def sketches(self) -> list[Sketch]:
        return [s for s, _ in self.steps]


IDENTITY_ROTATION = (1, 0, 0, 0, 1, 0, 0, 0, 1)


def curve(kind: str, pts: Iterable[tuple[int, int]]) -> Curve:
    """Shorthand constructor from (x, y) tuples, with arity checking."""
    points = tuple(GridPoint(int(x), int(y)) for x, y in pts)
    want = STORED_POINTS[kind]
    if len(points) != want:
        raise ValueError(f"{kind} needs {want} points, got {len(points)}")
    return Curve(kind, points)


# ---------------------------------------------------------------------------
# native JSON model files


def _curve_to_json(c: Curve) -> dict:
    return {"kind": c.kind, "pts": [[p.x, p.y] for p in c.points]}


def _curve_from_json(d: dict) -> Curve:
    return Curve(d["kind"], tuple(GridPoint(int(x), int(y)) for x, y in d["pts"]))


def model_to_json(model: ModelSE) -> dict:
    steps = []
    for sketch, ext in model.steps:
        faces = []
        for f in sketch.faces:
            faces.append(
                {
                    "outer": [_curve_to_json(c) for c in f.outer.curves],
                    "holes": [[_curve_to_json(c) for c in h.curves] for h in f.holes],
                }
            )
        steps.append(
            {
                "sketch": {"faces": faces},
                "extrude": {
                    "h": list(ext.heights),
                    "r": list(ext.rotation),
                    "o": list(ext.translation),
                    "s": list(ext.scale),
                    "bool": ext.boolean,
                },
            }
        )
    return {"version": JSON_VERSION, "steps": steps}


def model_from_json(doc: dict) -> ModelSE:
    if doc.get("version") != JSON_VERSION:
        raise ValueError(f"unsupported model file version {doc.get('version')!r}")
    steps = []
    for step in doc["steps"]:
        faces = []
        for f in step["sketch"]["faces"]:
            outer = Loop(tuple(_curve_from_json(c) for c in f["outer"]))
            holes = tuple(Loop(tuple(_curve_from_json(c) for c in h)) for h in f.get("holes", []))
            faces.append(Face(outer, holes))
        e = step["extrude"]
        ext = ExtrudeParams(
            heights=tuple(e["h"]),
            rotation=tuple(e["r"]),
            translation=tuple(e["o"]),
            scale=tuple(e["s"]),
            boolean=e["bool"],
        )
        steps.append((Sketch(tuple(faces)), ext))
    return ModelSE(tuple(steps))


def dumps_model(model: ModelSE) -> str:
    return json.dumps(model_to_json(model), separators=(",", ":"), sort_keys=True)


def loads_model(text: str) -> ModelSE:
    return model_from_json(json.loads(text))
