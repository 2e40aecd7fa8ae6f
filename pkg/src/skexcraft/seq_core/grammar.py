"""Canonical ordering, flattening, view splitting, and parsing.

The merged token sequence follows the primitive hierarchy: every curve
emits its type token, its geometry tokens (1/2/4 for line/arc/circle;
shared endpoints are supplied by the next curve in the loop) and an
end-curve token; loops, faces and sketches each close with their own
end-primitive token; each step's extrusion is a fixed 19-token block; the
sequence ends with a single end-of-sequence token.
"""

from __future__ import annotations

import hashlib

from .quantize import dequantize_point
from .tokens import (
    EXT_BLOCK_LEN,
    EXT_END_EXTRUDE,
    EXT_END_SEQ,
    EXT_ROT_NEG,
    EXT_ROT_POS,
    GEOM_END_CURVE,
    GEOM_END_FACE,
    GEOM_END_LOOP,
    GEOM_END_SEQ,
    GEOM_END_SKETCH,
    GEOM_PIXELS,
    EMITTED_POINTS,
    SubSeq,
    Token,
    TOPO_ARC,
    TOPO_CIRCLE,
    TOPO_END_FACE,
    TOPO_END_LOOP,
    TOPO_END_SEQ,
    TOPO_END_SKETCH,
    TOPO_LINE,
    bool_class,
    bool_value,
    format_token_text,
    geom_class,
    geom_class_to_pixel,
    rot_class,
    rot_value,
)
from .types import (
    BadCurveArity,
    CountMismatch,
    Curve,
    ExtrudeParams,
    Face,
    GridPoint,
    InvalidModel,
    Loop,
    MalformedSequence,
    ModelSE,
    Sketch,
)

TokenSeq = tuple[Token, ...]

_KIND_TO_TOPO = {"line": TOPO_LINE, "arc": TOPO_ARC, "circle": TOPO_CIRCLE}
_ARITY_TO_KIND = {1: "line", 2: "arc", 4: "circle"}


# ---------------------------------------------------------------------------
# canonical ordering


def _orientation_polygon(loop: Loop) -> list[tuple[float, float]]:
    """Dequantized sample polygon dense enough to judge loop orientation.

    Lines contribute their start, arcs start and mid, circles all four
    points; a two-arc loop therefore still yields a proper quadrilateral.
    """
    pts = []
    for c in loop.curves:
        if c.kind == "line":
            pts.append(dequantize_point(c.points[0]))
        elif c.kind == "arc":
            pts.append(dequantize_point(c.points[0]))
            pts.append(dequantize_point(c.points[1]))
        else:
            pts.extend(dequantize_point(p) for p in c.points)
    return pts


def signed_area(pts: list[tuple[float, float]]) -> float:
    a = 0.0
    n = len(pts)
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        a += x0 * y1 - x1 * y0
    return a / 2.0


def _reverse_loop(loop: Loop) -> Loop:
    return Loop(tuple(c.reversed() for c in reversed(loop.curves)))


def _canonical_loop(loop: Loop, ccw: bool) -> Loop:
    area = signed_area(_orientation_polygon(loop))
    if (area > 0) != ccw and area != 0:
        loop = _reverse_loop(loop)
    if loop.is_circle():
        pts = loop.curves[0].points
        start = min(range(4), key=lambda i: pts[i].key())
        rotated = tuple(pts[(start + i) % 4] for i in range(4))
        return Loop((Curve("circle", rotated),))
    starts = [c.start.key() for c in loop.curves]
    first = min(range(len(starts)), key=lambda i: starts[i])
    curves = loop.curves[first:] + loop.curves[:first]
    return Loop(curves)


def _loop_sort_key(loop: Loop) -> tuple:
    pts = loop.all_points()
    min_y = min(p.y for p in pts)
    min_x = min(p.x for p in pts)
    flat = tuple(v for p in pts for v in (p.y, p.x))
    return (min_y, min_x, flat)


def canonicalize(model: ModelSE) -> ModelSE:
    """Reorder a model into its canonical form.

    Faces are sorted by the (min-y, min-x) corner of their outer loop;
    within a face the outer loop comes first and holes are sorted by the
    same key; every loop starts at its lexicographically smallest (y, x)
    point and runs counterclockwise if outer, clockwise if a hole.  Step
    order is semantic (Boolean operations) and is preserved.
    """
    steps = []
    for sketch, ext in model.steps:
        faces = []
        for f in sketch.faces:
            outer = _canonical_loop(f.outer, ccw=True)
            holes = tuple(
                sorted((_canonical_loop(h, ccw=False) for h in f.holes), key=_loop_sort_key)
            )
            faces.append(Face(outer, holes))
        faces.sort(
            key=lambda f: (_loop_sort_key(f.outer), tuple(_loop_sort_key(h) for h in f.holes))
        )
        steps.append((Sketch(tuple(faces)), ext))
    return ModelSE(tuple(steps))


# ---------------------------------------------------------------------------
# flatten


def _flatten_curve(c: Curve) -> list[Token]:
    toks = [Token("T", _KIND_TO_TOPO[c.kind])]
    for p in c.points[: EMITTED_POINTS[c.kind]]:
        toks.append(Token("G", p.x, p.y))
    toks.append(Token("EC"))
    return toks


def _extrude_tokens(ext: ExtrudeParams) -> list[Token]:
    toks = [Token("XN", b) for b in ext.heights]
    toks += [Token("XR", v) for v in ext.rotation]
    toks += [Token("XN", b) for b in ext.translation]
    toks += [Token("XN", b) for b in ext.scale]
    toks.append(Token("XB", ("U", "I", "S").index(ext.boolean)))
    toks.append(Token("EX"))
    return toks


def flatten(model: ModelSE) -> TokenSeq:
    """Flatten a valid model into the merged token sequence (canonical order)."""
    from .validate import validate  # local import: validator uses grammar helpers

    diags = [d for d in validate(model) if d.severity == "error"]
    if diags:
        raise InvalidModel(diags)
    model = canonicalize(model)
    toks: list[Token] = []
    for sketch, ext in model.steps:
        for face in sketch.faces:
            for loop in face.loops():
                for c in loop.curves:
                    toks.extend(_flatten_curve(c))
                toks.append(Token("EL"))
            toks.append(Token("EF"))
        toks.append(Token("ES"))
        toks.extend(_extrude_tokens(ext))
    toks.append(Token("END"))
    return tuple(toks)


# ---------------------------------------------------------------------------
# projections


def split(seq: TokenSeq) -> tuple[SubSeq, SubSeq, SubSeq]:
    """Project a merged sequence onto its topology, geometry and extrude views."""
    if not seq or seq[-1].tag != "END":
        raise MalformedSequence("sequence does not terminate with the end token")
    if any(t.tag == "END" for t in seq[:-1]):
        raise MalformedSequence("end token appears before the end of the sequence")
    topo: list[int] = []
    geom: list[int] = []
    ext: list[int] = []
    for t in seq:
        if t.tag == "T":
            topo.append(t.a)
        elif t.tag == "G":
            geom.append(geom_class(t.a, t.b))
        elif t.tag == "EC":
            geom.append(GEOM_END_CURVE)
        elif t.tag == "EL":
            topo.append(TOPO_END_LOOP)
            geom.append(GEOM_END_LOOP)
        elif t.tag == "EF":
            topo.append(TOPO_END_FACE)
            geom.append(GEOM_END_FACE)
        elif t.tag == "ES":
            topo.append(TOPO_END_SKETCH)
            geom.append(GEOM_END_SKETCH)
        elif t.tag == "XN":
            ext.append(t.a)
        elif t.tag == "XR":
            ext.append(rot_class(t.a))
        elif t.tag == "XB":
            ext.append(bool_class(("U", "I", "S")[t.a]))
        elif t.tag == "EX":
            ext.append(EXT_END_EXTRUDE)
        elif t.tag == "END":
            topo.append(TOPO_END_SEQ)
            geom.append(GEOM_END_SEQ)
            ext.append(EXT_END_SEQ)
        else:
            raise MalformedSequence(f"unknown token tag {t.tag!r}")
    return (
        SubSeq("topology", tuple(topo)),
        SubSeq("geometry", tuple(geom)),
        SubSeq("extrude", tuple(ext)),
    )


def infer_topology(geom: SubSeq) -> SubSeq:
    """Recover the topology view from a geometry view via curve arity.

    A curve with 1/2/4 geometry tokens is a line/arc/circle; any other run
    length has no curve type and raises BadCurveArity.
    """
    if geom.kind != "geometry":
        raise ValueError("expected a geometry view")
    out: list[int] = []
    run = 0
    for c in geom.classes:
        if c < GEOM_PIXELS:
            run += 1
        elif c == GEOM_END_CURVE:
            if run not in _ARITY_TO_KIND:
                raise BadCurveArity(f"curve with {run} geometry tokens")
            out.append(_KIND_TO_TOPO[_ARITY_TO_KIND[run]])
            run = 0
        else:
            if run:
                raise MalformedSequence("geometry run not closed by an end-curve token")
            if c == GEOM_END_LOOP:
                out.append(TOPO_END_LOOP)
            elif c == GEOM_END_FACE:
                out.append(TOPO_END_FACE)
            elif c == GEOM_END_SKETCH:
                out.append(TOPO_END_SKETCH)
            elif c == GEOM_END_SEQ:
                out.append(TOPO_END_SEQ)
            else:
                raise MalformedSequence(f"unknown geometry class {c}")
    return SubSeq("topology", tuple(out))


# ---------------------------------------------------------------------------
# parse


def _parse_sketch_loops(geom: SubSeq) -> list[list[list[list[GridPoint]]]]:
    """Split a geometry view into sketches -> faces -> loops -> curve runs."""
    if geom.kind != "geometry":
        raise ValueError("expected a geometry view")
    cls = list(geom.classes)
    if not cls or cls[-1] != GEOM_END_SEQ:
        raise MalformedSequence("geometry view does not end with the end token")
    if GEOM_END_SEQ in cls[:-1]:
        raise MalformedSequence("end token appears before the end of the view")

    sketches: list = []
    faces: list = []
    loops: list = []
    runs: list = []
    run: list[GridPoint] = []
    for c in cls[:-1]:
        if c < GEOM_PIXELS:
            x, y = geom_class_to_pixel(c)
            run.append(GridPoint(x, y))
        elif c == GEOM_END_CURVE:
            if not run:
                raise MalformedSequence("end-curve token closes an empty run")
            runs.append(run)
            run = []
        elif c == GEOM_END_LOOP:
            if run:
                raise MalformedSequence("loop closed with an unterminated curve")
            if not runs:
                raise MalformedSequence("loop with no curves")
            loops.append(runs)
            runs = []
        elif c == GEOM_END_FACE:
            if run or runs:
                raise MalformedSequence("face closed with an unterminated loop")
            if not loops:
                raise MalformedSequence("face with no loops")
            faces.append(loops)
            loops = []
        elif c == GEOM_END_SKETCH:
            if run or runs or loops:
                raise MalformedSequence("sketch closed with an unterminated face")
            if not faces:
                raise MalformedSequence("sketch with no faces")
            sketches.append(faces)
            faces = []
        else:
            raise MalformedSequence(f"unexpected geometry class {c}")
    if run or runs or loops or faces:
        raise MalformedSequence("view ends with an unterminated primitive")
    if not sketches:
        raise MalformedSequence("view contains no sketches")
    return sketches


def _loop_from_runs(runs: list[list[GridPoint]]) -> Loop:
    """Rebuild curves from emitted points by chaining run endpoints."""
    has_circle = any(len(r) == 4 for r in runs)
    if has_circle:
        if len(runs) != 1:
            raise MalformedSequence("a circle must be the only curve in its loop")
        return Loop((Curve("circle", tuple(runs[0])),))
    curves = []
    for i, r in enumerate(runs):
        if len(r) not in (1, 2):
            raise BadCurveArity(f"curve with {len(r)} geometry tokens")
        nxt = runs[(i + 1) % len(runs)][0]
        curves.append(Curve(_ARITY_TO_KIND[len(r)], tuple(r) + (nxt,)))
    return Loop(tuple(curves))


def _parse_extrude_blocks(ext: SubSeq) -> list[ExtrudeParams]:
    if ext.kind != "extrude":
        raise ValueError("expected an extrude view")
    cls = list(ext.classes)
    if not cls or cls[-1] != EXT_END_SEQ:
        raise MalformedSequence("extrude view does not end with the end token")
    body = cls[:-1]
    if EXT_END_SEQ in body:
        raise MalformedSequence("end token appears before the end of the view")
    if len(body) % EXT_BLOCK_LEN != 0:
        raise MalformedSequence("extrude view length does not match the block template")
    blocks = []
    for i in range(0, len(body), EXT_BLOCK_LEN):
        b = body[i : i + EXT_BLOCK_LEN]
        nums = b[0:2] + b[11:17]
        if any(not (0 <= v < 64) for v in nums):
            raise MalformedSequence("numeric slot holds a non-numeric class")
        if any(not (EXT_ROT_NEG <= v <= EXT_ROT_POS) for v in b[2:11]):
            raise MalformedSequence("rotation slot holds a non-rotation class")
        if not (67 <= b[17] <= 69):
            raise MalformedSequence("boolean slot holds a non-boolean class")
        if b[18] != EXT_END_EXTRUDE:
            raise MalformedSequence("block does not close with the end-extrude token")
        blocks.append(
            ExtrudeParams(
                heights=(b[0], b[1]),
                rotation=tuple(rot_value(v) for v in b[2:11]),
                translation=tuple(b[11:14]),
                scale=tuple(b[14:17]),
                boolean=bool_value(b[17]),
            )
        )
    return blocks


def parse(geom: SubSeq, ext: SubSeq) -> ModelSE:
    """Reconstruct a model from its geometry and extrude views.

    Curve endpoints are recovered by chaining: a curve's final point is the
    next curve's first point, and loop closure supplies the last one.
    """
    sketches = _parse_sketch_loops(geom)
    blocks = _parse_extrude_blocks(ext)
    if len(sketches) != len(blocks):
        raise CountMismatch(
            f"{len(sketches)} sketches but {len(blocks)} extrude blocks"
        )
    steps = []
    for face_runs, params in zip(sketches, blocks):
        faces = []
        for loops in face_runs:
            built = [_loop_from_runs(runs) for runs in loops]
            faces.append(Face(built[0], tuple(built[1:])))
        steps.append((Sketch(tuple(faces)), params))
    return ModelSE(tuple(steps))


# ---------------------------------------------------------------------------
# dedup keys


def dedup_key(model: ModelSE) -> str:
    """Opaque key equal for two models iff their flattened tokens are identical."""
    topo, geom, ext = split(flatten(model))
    text = format_token_text(topo, geom, ext)
    return hashlib.sha256(text.encode()).hexdigest()


def view_key(view: SubSeq) -> str:
    """Dedup key for a single projection (sketch-view / extrude-view dedup)."""
    text = view.kind + ":" + " ".join(str(c) for c in view.classes)
    return hashlib.sha256(text.encode()).hexdigest()
