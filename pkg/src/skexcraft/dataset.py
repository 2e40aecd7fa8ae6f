"""Synthetic corpus generation, splits, augmentation, and JSONL storage.

Shapes are drawn from parametric templates (rectangles, regular polygons,
circles, slots, faces with holes) quantized to the coordinate grid, extruded
with axis-aligned placements, and combined over one or two boolean steps.
Every generated model is validated and canonicalized; generation retries
until the requested number of distinct models exists.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .seq_core.grammar import canonicalize, dedup_key
from .seq_core.types import (
    Curve,
    ExtrudeParams,
    Face,
    GridPoint,
    IDENTITY_ROTATION,
    Loop,
    ModelSE,
    Sketch,
    curve,
    model_from_json,
    model_to_json,
)
from .seq_core.validate import is_valid

GRID = 64

TEMPLATE_NAMES = ("rectangle", "polygon", "circle", "slot", "holed")


def axis_rotations() -> list[tuple[int, ...]]:
    """All 24 right-handed axis-aligned rotation matrices, row-major."""
    out = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1, -1), repeat=3):
            m = np.zeros((3, 3), dtype=int)
            for r, (c, s) in enumerate(zip(perm, signs)):
                m[r, c] = s
            if round(np.linalg.det(m)) == 1:
                out.append(tuple(int(v) for v in m.reshape(-1)))
    assert len(out) == 24
    return out


_ROTATIONS = axis_rotations()


@dataclass(frozen=True)
class CorpusSpec:
    n_models: int = 256
    max_steps: int = 2
    two_step_fraction: float = 0.45
    templates: tuple[str, ...] = TEMPLATE_NAMES
    rotations: bool = True
    max_tries_per_model: int = 60


def _rect_points(rng, lo=2, hi=60, min_side=6):
    x0 = int(rng.integers(lo, hi - min_side))
    y0 = int(rng.integers(lo, hi - min_side))
    x1 = int(rng.integers(x0 + min_side, min(hi, x0 + 36) + 1))
    y1 = int(rng.integers(y0 + min_side, min(hi, y0 + 36) + 1))
    return x0, y0, x1, y1


def _rect_loop(x0, y0, x1, y1) -> Loop:
    pts = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    curves = [curve("line", (pts[i], pts[(i + 1) % 4])) for i in range(4)]
    return Loop(tuple(curves))


def _rectangle(rng) -> Face:
    return Face(outer=_rect_loop(*_rect_points(rng)))


def _polygon(rng) -> Face | None:
    n = int(rng.integers(3, 9))
    cx = float(rng.uniform(18, 46))
    cy = float(rng.uniform(18, 46))
    r = float(rng.uniform(8, 16))
    phase = float(rng.uniform(0, 2 * np.pi))
    pts = []
    for k in range(n):
        a = phase + 2 * np.pi * k / n
        pts.append((int(round(cx + r * np.cos(a))), int(round(cy + r * np.sin(a)))))
    if len(set(pts)) != n:
        return None
    if not all(0 <= x < GRID and 0 <= y < GRID for x, y in pts):
        return None
    curves = [curve("line", (pts[i], pts[(i + 1) % n])) for i in range(n)]
    return Face(outer=Loop(tuple(curves)))


def _circle_loop(cx: int, cy: int, r: int) -> Loop:
    pts = ((cx + r, cy), (cx, cy + r), (cx - r, cy), (cx, cy - r))
    return Loop((curve("circle", pts),))


def _circle(rng) -> Face:
    r = int(rng.integers(5, 15))
    cx = int(rng.integers(r + 2, GRID - r - 2))
    cy = int(rng.integers(r + 2, GRID - r - 2))
    return Face(outer=_circle_loop(cx, cy, r))


def _slot(rng) -> Face:
    """Stadium: two semicircular arc ends joined by parallel lines."""
    h = int(rng.integers(4, 10))
    cy = int(rng.integers(h + 4, GRID - h - 4))
    cx0 = int(rng.integers(h + 4, 40))
    cx1 = int(rng.integers(cx0 + 8, min(GRID - h - 3, cx0 + 34)))
    top0, top1 = (cx0, cy + h), (cx1, cy + h)
    bot0, bot1 = (cx0, cy - h), (cx1, cy - h)
    curves = (
        curve("line", (bot0, bot1)),
        curve("arc", (bot1, (cx1 + h, cy), top1)),
        curve("line", (top1, top0)),
        curve("arc", (top0, (cx0 - h, cy), bot0)),
    )
    return Face(outer=Loop(curves))


def _holed(rng) -> Face | None:
    x0, y0, x1, y1 = _rect_points(rng, lo=4, hi=58, min_side=14)
    w, h = x1 - x0, y1 - y0
    if rng.random() < 0.5:
        r = min(w, h) // 2 - 3
        if r < 3:
            return None
        r = int(rng.integers(3, r + 1))
        cx = int(rng.integers(x0 + r + 2, x1 - r - 1))
        cy = int(rng.integers(y0 + r + 2, y1 - r - 1))
        hole = _circle_loop(cx, cy, r)
    else:
        hx0 = int(rng.integers(x0 + 3, x1 - 6))
        hy0 = int(rng.integers(y0 + 3, y1 - 6))
        hx1 = int(rng.integers(hx0 + 3, x1 - 2))
        hy1 = int(rng.integers(hy0 + 3, y1 - 2))
        hole = _rect_loop(hx0, hy0, hx1, hy1)
    return Face(outer=_rect_loop(x0, y0, x1, y1), holes=(hole,))


_TEMPLATES = {
    "rectangle": _rectangle,
    "polygon": _polygon,
    "circle": _circle,
    "slot": _slot,
    "holed": _holed,
}


def _face_bbox_center(face: Face) -> tuple[int, int]:
    pts = [(p.x, p.y) for c in face.outer.curves for p in c.points]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return (min(xs) + max(xs)) // 2, (min(ys) + max(ys)) // 2


def _extrude(rng, face: Face, first: bool, rotations: bool) -> ExtrudeParams:
    top = int(rng.integers(34, 56))
    bottom = int(rng.integers(10, 31))
    rot = IDENTITY_ROTATION
    if rotations:
        rot = _ROTATIONS[int(rng.integers(0, len(_ROTATIONS)))]
    translation = tuple(int(rng.integers(24, 41)) for _ in range(3))
    cx, cy = _face_bbox_center(face)
    factor = int(rng.integers(25, 38))  # dequantizes to roughly 0.8 .. 1.2
    boolean = "U" if first else ("U", "I", "S")[int(rng.integers(0, 3))]
    return ExtrudeParams(heights=(top, bottom), rotation=rot,
                         translation=translation, scale=(cx, cy, factor),
                         boolean=boolean)


def _composes_nonempty(model: ModelSE, rng: np.random.Generator) -> bool:
    """One sampling round over the Boolean result; rejects empty solids.

    Intersections and subtractions can cancel the whole shape while the
    token sequence stays valid, and those degenerate models would poison
    both training and surface metrics.
    """
    from .geom_kernel.csg import csg_surface_sample
    from .geom_kernel.errors import EmptyResult
    from .geom_kernel.evaluate import evaluate_model

    try:
        csg_surface_sample(evaluate_model(model, tol=1e-2), 32, rng,
                           max_rounds=1)
    except EmptyResult:
        return False
    return True


def _one_model(spec: CorpusSpec, rng: np.random.Generator) -> ModelSE | None:
    n_steps = 1
    if spec.max_steps > 1 and rng.random() < spec.two_step_fraction:
        n_steps = int(rng.integers(2, spec.max_steps + 1))
    steps = []
    for si in range(n_steps):
        name = spec.templates[int(rng.integers(0, len(spec.templates)))]
        face = _TEMPLATES[name](rng)
        if face is None:
            return None
        ext = _extrude(rng, face, first=si == 0, rotations=spec.rotations)
        steps.append((Sketch((face,)), ext))
    model = ModelSE(tuple(steps))
    if not is_valid(model):
        return None
    if not _composes_nonempty(model, rng):
        return None
    return canonicalize(model)


def generate_corpus(spec: CorpusSpec, rng: np.random.Generator) -> list[ModelSE]:
    """Draw distinct valid models until the requested count is reached.

    Deterministic for a given generator state.  Raises RuntimeError if the
    retry budget runs out, which signals templates that reject too often.
    """
    seen: dict[str, ModelSE] = {}
    budget = spec.n_models * spec.max_tries_per_model
    tries = 0
    while len(seen) < spec.n_models and tries < budget:
        tries += 1
        model = _one_model(spec, rng)
        if model is None:
            continue
        seen.setdefault(dedup_key(model), model)
    if len(seen) < spec.n_models:
        raise RuntimeError(
            f"generated only {len(seen)}/{spec.n_models} distinct models "
            f"in {tries} tries")
    return list(seen.values())


def split_corpus(models: list[ModelSE], rng: np.random.Generator,
                 val_frac: float = 0.05, test_frac: float = 0.05):
    """Shuffled train/val/test split; val and test get round(frac*n) each."""
    order = rng.permutation(len(models))
    n_val = int(round(val_frac * len(models)))
    n_test = int(round(test_frac * len(models)))
    val = [models[i] for i in order[:n_val]]
    test = [models[i] for i in order[n_val: n_val + n_test]]
    train = [models[i] for i in order[n_val + n_test:]]
    return train, val, test


def augment(model: ModelSE, rng: np.random.Generator,
            p_move: float = 0.3) -> ModelSE:
    """Jitter sketch control points by one bin and revalidate.

    Each coordinate moves -1/0/+1 with probabilities (p_move/2, 1-p_move,
    p_move/2), clamped to the grid.  If the jittered model fails validation
    the original is returned unchanged.
    """
    probs = (p_move / 2, 1 - p_move, p_move / 2)

    def jitter(v: int) -> int:
        step = rng.choice((-1, 0, 1), p=probs)
        return int(np.clip(v + step, 0, GRID - 1))

    def jitter_loop(loop: Loop) -> Loop:
        # shared corner points must move together, so jitter by point key
        moved: dict[tuple[int, int], GridPoint] = {}

        def move(pt: GridPoint) -> GridPoint:
            key = (pt.x, pt.y)
            if key not in moved:
                moved[key] = GridPoint(jitter(pt.x), jitter(pt.y))
            return moved[key]

        return Loop(tuple(
            Curve(c.kind, tuple(move(p) for p in c.points))
            for c in loop.curves))

    steps = []
    for sketch, ext in model.steps:
        faces = tuple(
            Face(outer=jitter_loop(f.outer),
                 holes=tuple(jitter_loop(h) for h in f.holes))
            for f in sketch.faces)
        steps.append((Sketch(faces), ext))
    candidate = ModelSE(tuple(steps))
    if not is_valid(candidate):
        return model
    return canonicalize(candidate)


def write_jsonl(path, models: list[ModelSE]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for m in models:
            fh.write(json.dumps(model_to_json(m), separators=(",", ":")) + "\n")


def read_jsonl(path) -> list[ModelSE]:
    models = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                models.append(model_from_json(json.loads(line)))
    return models


def write_corpus(out_dir, train: list[ModelSE], val: list[ModelSE],
                 test: list[ModelSE], meta: dict | None = None) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = {"train": train, "val": val, "test": test}
    for name, models in names.items():
        write_jsonl(out / f"{name}.jsonl", models)
    manifest = {
        "version": 1,
        "counts": {k: len(v) for k, v in names.items()},
    }
    if meta:
        manifest.update(meta)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def read_corpus(in_dir) -> dict[str, list[ModelSE]]:
    out = {}
    for name in ("train", "val", "test"):
        path = Path(in_dir) / f"{name}.jsonl"
        out[name] = read_jsonl(path) if path.exists() else []
    return out
