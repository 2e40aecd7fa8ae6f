"""Token alphabets and class-index layouts.

Three projections of a flattened construction sequence exist, each with its
own fixed class-index layout.  The layouts are part of the checkpoint and
file contract and must never be reordered:

  topology (7 classes):   line=0, arc=1, circle=2, endLoop=3, endFace=4,
                          endSketch=5, endSeq=6
  geometry (4101 classes): pixel y*64+x for 0..4095, endCurve=4096,
                          endLoop=4097, endFace=4098, endSketch=4099,
                          endSeq=4100
  extrude (72 classes):   numeric bins 0..63, rotation -1/0/+1 = 64/65/66,
                          boolean U/I/S = 67/68/69, endExtrudedSketch=70,
                          endSeq=71
"""

from __future__ import annotations

from dataclasses import dataclass

GRID = 64

# topology classes
TOPO_LINE = 0
TOPO_ARC = 1
TOPO_CIRCLE = 2
TOPO_END_LOOP = 3
TOPO_END_FACE = 4
TOPO_END_SKETCH = 5
TOPO_END_SEQ = 6
TOPO_VOCAB = 7

# geometry classes
GEOM_PIXELS = GRID * GRID
GEOM_END_CURVE = GEOM_PIXELS
GEOM_END_LOOP = GEOM_PIXELS + 1
GEOM_END_FACE = GEOM_PIXELS + 2
GEOM_END_SKETCH = GEOM_PIXELS + 3
GEOM_END_SEQ = GEOM_PIXELS + 4
GEOM_VOCAB = GEOM_PIXELS + 5

# extrude classes
EXT_ROT_NEG = 64
EXT_ROT_ZERO = 65
EXT_ROT_POS = 66
EXT_BOOL_UNION = 67
EXT_BOOL_INTERSECT = 68
EXT_BOOL_SUBTRACT = 69
EXT_END_EXTRUDE = 70
EXT_END_SEQ = 71
EXT_VOCAB = 72

# extrude block template: H H R*9 O*3 S*3 B EndExtrudedSketch
EXT_BLOCK_LEN = 19

CURVE_KINDS = ("line", "arc", "circle")
BOOLEAN_OPS = ("U", "I", "S")

# geometry tokens emitted per curve kind when flattened (shared endpoints
# are supplied by the next curve in the loop)
EMITTED_POINTS = {"line": 1, "arc": 2, "circle": 4}
# points stored on the in-memory curve
STORED_POINTS = {"line": 2, "arc": 3, "circle": 4}

_ROT_CLASS = {-1: EXT_ROT_NEG, 0: EXT_ROT_ZERO, 1: EXT_ROT_POS}
_BOOL_CLASS = {"U": EXT_BOOL_UNION, "I": EXT_BOOL_INTERSECT, "S": EXT_BOOL_SUBTRACT}
_CLASS_ROT = {v: k for k, v in _ROT_CLASS.items()}
_CLASS_BOOL = {v: k for k, v in _BOOL_CLASS.items()}


@dataclass(frozen=True)
class Token:
    """One element of the merged construction sequence.

    tag is one of:
      T   curve-type token, a = 0/1/2 for line/arc/circle
      G   geometry token, a = x pixel, b = y pixel
      EC / EL / EF / ES   end of curve / loop / face / sketch
      XN  extrude numeric token, a = bin in [0,63]
      XR  extrude rotation entry, a in {-1,0,1}
      XB  extrude boolean, a = 0/1/2 for U/I/S
      EX  end of extruded sketch
      END end of sequence
    """

    tag: str
    a: int = 0
    b: int = 0


@dataclass(frozen=True)
class SubSeq:
    """One projection of a flattened sequence as class indices."""

    kind: str  # "topology" | "geometry" | "extrude"
    classes: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in ("topology", "geometry", "extrude"):
            raise ValueError(f"unknown subsequence kind {self.kind!r}")


def geom_class(x: int, y: int) -> int:
    if not (0 <= x < GRID and 0 <= y < GRID):
        raise ValueError(f"pixel ({x},{y}) outside the {GRID}x{GRID} grid")
    return y * GRID + x


def geom_class_to_pixel(c: int) -> tuple[int, int]:
    if not (0 <= c < GEOM_PIXELS):
        raise ValueError(f"class {c} is not a pixel class")
    return c % GRID, c // GRID


def rot_class(v: int) -> int:
    return _ROT_CLASS[v]


def rot_value(c: int) -> int:
    return _CLASS_ROT[c]


def bool_class(op: str) -> int:
    return _BOOL_CLASS[op]


def bool_value(c: int) -> str:
    return _CLASS_BOOL[c]


def format_token_text(topo: SubSeq, geom: SubSeq, ext: SubSeq) -> str:
    """Serialize the three views in the token text format (one view per line)."""
    lines = [
        "TOPO: " + " ".join(str(c) for c in topo.classes),
        "GEOM: " + " ".join(str(c) for c in geom.classes),
        "EXT: " + " ".join(str(c) for c in ext.classes),
    ]
    return "\n".join(lines) + "\n"


def parse_token_text(text: str) -> tuple[SubSeq, SubSeq, SubSeq]:
    views: dict[str, tuple[int, ...]] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        prefix, _, rest = line.partition(":")
        key = prefix.strip()
        if key not in ("TOPO", "GEOM", "EXT"):
            raise ValueError(f"unknown view prefix {key!r}")
        views[key] = tuple(int(f) for f in rest.split())
    missing = {"TOPO", "GEOM", "EXT"} - views.keys()
    if missing:
        raise ValueError(f"token text is missing views: {sorted(missing)}")
    return (
        SubSeq("topology", views["TOPO"]),
        SubSeq("geometry", views["GEOM"]),
        SubSeq("extrude", views["EXT"]),
    )
