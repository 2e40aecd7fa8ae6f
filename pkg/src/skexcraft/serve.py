"""HTTP JSON API over a frozen checkpoint bundle.

The bundle (both branches plus selectors) is loaded once and never mutated;
every request carries its own seed, so concurrent identical requests return
identical bodies.  Responses bundle the decoded model JSON with its code
indices, per-sketch SVG, an OBJ mesh, and a validity flag.

Status codes: 400 for schema violations (including malformed model JSON and
out-of-range code indices), 409 when a decode fails to produce a parseable
sequence or a needed selector variant is missing, 503 until a checkpoint is
loaded.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .genmodel.config import ModelConfig
from .genmodel.generate import (
    GenerationExhausted,
    decode_codes,
    encode_model,
    generate,
    interpolate,
    mix_codes,
)
from .genmodel.persist import Bundle, load_bundle
from .genmodel.selector import BRANCH_ORDER, CodeSelector
from .nn_core.checkpoint import CheckpointError
from .seq_core.types import ModelSE, model_from_json, model_to_json
from .seq_core.validate import validate

N_CODES = {"topology": 4, "geometry": 2, "extrude": 4}


class SampleBody(BaseModel):
    n: int
    seed: int
    nucleus_p: float = 0.9
    condition: dict[str, list[int]] | None = None


class EncodeBody(BaseModel):
    model: dict


class DecodeBody(BaseModel):
    codes: dict[str, list[int]]


class PairBody(BaseModel):
    modelA: dict
    modelB: dict


class InterpolateBody(PairBody):
    steps: int


class MixBody(PairBody):
    take: dict[str, str]


def _parse_model(doc: dict, which: str) -> ModelSE:
    try:
        return model_from_json(doc)
    except Exception as exc:
        raise HTTPException(400, f"bad {which}: {exc}")


def _check_codes(codes: dict, cfg: ModelConfig) -> dict[str, np.ndarray]:
    sizes = {"topology": cfg.topo_codebook, "geometry": cfg.geom_codebook,
             "extrude": cfg.ext_codebook}
    unknown = set(codes) - set(BRANCH_ORDER)
    if unknown:
        raise HTTPException(400, f"unknown code branches: {sorted(unknown)}")
    out = {}
    for branch, idx in codes.items():
        if len(idx) != N_CODES[branch]:
            raise HTTPException(
                400, f"{branch} needs {N_CODES[branch]} codes, got {len(idx)}")
        if any(not 0 <= i < sizes[branch] for i in idx):
            raise HTTPException(
                400, f"{branch} code index out of range [0, {sizes[branch]})")
        out[branch] = np.asarray(idx, dtype=np.int64)
    return out


def _codes_doc(codes: dict[str, np.ndarray]) -> dict:
    return {b: [int(i) for i in codes[b]] for b in BRANCH_ORDER if b in codes}


def _result_item(model: ModelSE | None, codes: dict | None) -> dict:
    from .geom_kernel.evaluate import model_to_obj, model_to_svgs

    item = {"model": None, "codes": _codes_doc(codes) if codes else None,
            "svg": [], "obj": "", "valid": False, "diagnostics": []}
    if model is None:
        item["diagnostics"] = ["decode produced no valid model"]
        return item
    diags = validate(model)
    item["model"] = model_to_json(model)
    item["valid"] = not diags
    item["diagnostics"] = [f"{d.rule} at {d.path}: {d.message}" for d in diags]
    if not diags:
        item["svg"] = model_to_svgs(model)
        item["obj"] = model_to_obj(model)
    return item


def create_app(ckpt_dir=None) -> FastAPI:
    app = FastAPI(title="skexcraft")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    state: dict[str, Bundle | None] = {"bundle": None}
    if ckpt_dir is not None:
        state["bundle"] = load_bundle(ckpt_dir)

    @app.exception_handler(RequestValidationError)
    async def bad_schema(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(p) for p in first.get("loc", ()))
        return JSONResponse(
            status_code=400,
            content={"detail": f"schema violation at {where}: "
                               f"{first.get('msg', 'invalid body')}"})

    def bundle() -> Bundle:
        b = state["bundle"]
        if b is None:
            raise HTTPException(503, "checkpoint not loaded")
        return b

    @app.get("/health")
    def health():
        b = state["bundle"]
        if b is None:
            return JSONResponse(status_code=503,
                                content={"status": "loading", "loaded": False})
        return {"status": "ok", "loaded": True,
                "selectors": sorted(b.selectors),
                "meta": b.meta}

    @app.post("/sample")
    def sample(body: SampleBody):
        b = bundle()
        if not 1 <= body.n <= 256:
            raise HTTPException(400, "n must be in [1, 256]")
        if not 0.0 < body.nucleus_p <= 1.0:
            raise HTTPException(400, "nucleus_p must be in (0, 1]")
        condition = body.condition or {}
        given = _check_codes(condition, b.sketch.cfg)
        keys = frozenset(given)
        if keys == frozenset(BRANCH_ORDER):
            # fully specified tuple: nothing left to select
            selector = CodeSelector(b.sketch.cfg, keys, np.random.default_rng(0))
        else:
            try:
                selector = b.selector_for(keys)
            except CheckpointError as exc:
                raise HTTPException(409, str(exc))
        rng = np.random.default_rng(body.seed)
        exhausted = False
        try:
            result = generate(b.sketch, b.extrude, selector, body.n, rng,
                              nucleus_p=body.nucleus_p, given=given or None)
        except GenerationExhausted as exc:
            result = exc.result
            exhausted = True
        items = [_result_item(m, c)
                 for m, c in zip(result.models, result.codes)]
        return {"results": items, "n_requested": body.n,
                "n_attempts": result.n_attempts,
                "validity_percent": 100.0 * result.validity_rate,
                "exhausted": exhausted}

    @app.post("/encode")
    def encode(body: EncodeBody):
        b = bundle()
        model = _parse_model(body.model, "model")
        diags = validate(model)
        if diags:
            raise HTTPException(
                409, "model fails validation: " +
                     "; ".join(f"{d.rule} at {d.path}" for d in diags[:3]))
        codes = encode_model(b.sketch, b.extrude, model)
        item = _result_item(model, codes)
        return item

    @app.post("/decode")
    def decode(body: DecodeBody):
        b = bundle()
        codes = _check_codes(body.codes, b.sketch.cfg)
        missing = set(BRANCH_ORDER) - set(codes)
        if missing:
            raise HTTPException(400, f"missing code branches: {sorted(missing)}")
        model = decode_codes(b.sketch, b.extrude, codes,
                             np.random.default_rng(0))
        if model is None:
            raise HTTPException(409, "decode failure: codes produced no "
                                     "parseable construction sequence")
        return _result_item(model, codes)

    @app.post("/interpolate")
    def interp(body: InterpolateBody):
        b = bundle()
        if not 2 <= body.steps <= 64:
            raise HTTPException(400, "steps must be in [2, 64]")
        a = _parse_model(body.modelA, "modelA")
        bb = _parse_model(body.modelB, "modelB")
        models = interpolate(b.sketch, b.extrude, a, bb, body.steps)
        items = []
        for m in models:
            codes = encode_model(b.sketch, b.extrude, m) if m is not None else None
            items.append(_result_item(m, codes))
        return {"results": items, "steps": body.steps}

    @app.post("/mix")
    def mix(body: MixBody):
        b = bundle()
        if set(body.take) != set(BRANCH_ORDER) or \
                any(v not in ("A", "B") for v in body.take.values()):
            raise HTTPException(
                400, "take must map topology/geometry/extrude to 'A' or 'B'")
        a = _parse_model(body.modelA, "modelA")
        bb = _parse_model(body.modelB, "modelB")
        ca = encode_model(b.sketch, b.extrude, a)
        cb = encode_model(b.sketch, b.extrude, bb)
        take_a = {k for k, v in body.take.items() if v == "A"}
        codes = mix_codes(ca, cb, take_a)
        model = decode_codes(b.sketch, b.extrude, codes,
                             np.random.default_rng(0))
        if model is None:
            raise HTTPException(409, "decode failure: mixed codes produced "
                                     "no parseable construction sequence")
        return _result_item(model, codes)

    return app
