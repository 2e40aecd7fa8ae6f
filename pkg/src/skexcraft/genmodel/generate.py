"""Sampling, reconstruction, interpolation, and code mixing.

Generation is rejection-based: sampled token views that fail to parse or
validate are discarded and counted against the validity rate.  Decoding a
fixed code tuple greedily (temperature 0) is deterministic, which is what
reconstruction, interpolation, and mixing use.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..nn_core.tensor import Tensor
from ..seq_core import grammar
from ..seq_core.validate import is_valid
from ..seq_core.tokens import SubSeq
from ..seq_core.types import ModelSE, SeqError
from .branches import ExtrudeBranch, SketchBranch
from .selector import BRANCH_ORDER, CodeSelector
from .training import pad_sequences


class GenerationExhausted(RuntimeError):
    """Too many rejected samples before reaching the requested count."""

    def __init__(self, message: str, result: "GenerationResult"):
        super().__init__(message)
        self.result = result


@dataclass
class GenerationResult:
    models: list[ModelSE]
    n_attempts: int
    n_valid: int
    codes: list[dict[str, np.ndarray]] = field(default_factory=list)

    @property
    def validity_rate(self) -> float:
        return self.n_valid / self.n_attempts if self.n_attempts else 0.0


def model_views(model: ModelSE) -> tuple[list[int], list[int], list[int]]:
    """Token class lists (topology, geometry, extrude) for one model."""
    topo, geom, ext = grammar.split(grammar.flatten(model))
    return topo.classes, geom.classes, ext.classes


def encode_model(sketch: SketchBranch, extrude: ExtrudeBranch,
                 model: ModelSE) -> dict[str, np.ndarray]:
    """Quantized code indices for one model: 4 topology, 2 geometry, 4 extrude."""
    topo, geom, ext = model_views(model)
    t_ids, t_valid, _ = pad_sequences([topo])
    g_ids, g_valid, _ = pad_sequences([geom])
    tp, ge = sketch.encode_indices(t_ids, t_valid, g_ids, g_valid)
    e_ids, e_valid, e_len = pad_sequences([ext])
    ex = extrude.encode_indices(e_ids, e_valid, e_len)
    return {"topology": tp[0], "geometry": ge[0], "extrude": ex[0]}


def encode_vectors(sketch: SketchBranch, extrude: ExtrudeBranch,
                   model: ModelSE) -> dict[str, np.ndarray]:
    """Pre-quantization encoder outputs: (4,d), (2,d), (4,d) arrays."""
    topo, geom, ext = model_views(model)
    t_ids, t_valid, _ = pad_sequences([topo])
    g_ids, g_valid, _ = pad_sequences([geom])
    z_tp, z_ge = sketch.encode(t_ids, t_valid, g_ids, g_valid)
    e_ids, e_valid, e_len = pad_sequences([ext])
    z_ex = extrude.encode(e_ids, e_valid, e_len)
    return {"topology": z_tp.data[0], "geometry": z_ge.data[0],
            "extrude": z_ex.data[0]}


def _decode_memories(sketch: SketchBranch, extrude: ExtrudeBranch,
                     mem_sketch: Tensor, mem_ext: Tensor,
                     rng: np.random.Generator, nucleus_p: float,
                     temperature: float) -> ModelSE | None:
    """Sample both views and assemble a validated model; None on rejection."""
    geom_rows = sketch.sample(mem_sketch, rng, nucleus_p, temperature)
    ext_rows = extrude.sample(mem_ext, rng, nucleus_p, temperature)
    if geom_rows[0] is None or ext_rows[0] is None:
        return None
    try:
        model = grammar.parse(SubSeq("geometry", tuple(geom_rows[0])),
                              SubSeq("extrude", tuple(ext_rows[0])))
    except SeqError:
        return None
    if not is_valid(model):
        return None
    return model


def decode_codes(sketch: SketchBranch, extrude: ExtrudeBranch,
                 codes: dict[str, np.ndarray], rng: np.random.Generator,
                 nucleus_p: float = 0.9,
                 temperature: float = 0.0) -> ModelSE | None:
    """Decode one code index tuple; deterministic at temperature 0."""
    mem_s = sketch.memory_from_indices(codes["topology"], codes["geometry"])
    mem_e = extrude.memory_from_indices(codes["extrude"])
    return _decode_memories(sketch, extrude, mem_s, mem_e, rng,
                            nucleus_p, temperature)


def reconstruct(sketch: SketchBranch, extrude: ExtrudeBranch,
                model: ModelSE, rng: np.random.Generator | None = None) -> ModelSE | None:
    """Round-trip a model through its quantized codes with greedy decoding."""
    rng = rng or np.random.default_rng(0)
    return decode_codes(sketch, extrude, encode_model(sketch, extrude, model), rng)


def generate(sketch: SketchBranch, extrude: ExtrudeBranch,
             selector: CodeSelector, n: int, rng: np.random.Generator,
             nucleus_p: float = 0.9, temperature: float = 1.0,
             given: dict[str, np.ndarray] | None = None,
             max_attempts: int | None = None) -> GenerationResult:
    """Sample n valid models through the selector, rejecting invalid draws.

    given carries conditioned branch codes when the selector variant needs
    them.  Raises GenerationExhausted (with partial results attached) when
    the attempt budget runs out first.
    """
    if max_attempts is None:
        max_attempts = max(32 * n, 64)
    result = GenerationResult(models=[], n_attempts=0, n_valid=0)
    while result.n_valid < n and result.n_attempts < max_attempts:
        result.n_attempts += 1
        codes = selector.sample(rng, given=given, nucleus_p=nucleus_p,
                                temperature=temperature)
        model = decode_codes(sketch, extrude, codes, rng,
                             nucleus_p=nucleus_p, temperature=temperature)
        if model is None:
            continue
        result.models.append(model)
        result.codes.append(codes)
        result.n_valid += 1
    if result.n_valid < n:
        raise GenerationExhausted(
            f"{result.n_valid}/{n} valid models after {result.n_attempts} attempts",
            result)
    return result


def interpolate(sketch: SketchBranch, extrude: ExtrudeBranch,
                model_a: ModelSE, model_b: ModelSE, steps: int,
                rng: np.random.Generator | None = None) -> list[ModelSE | None]:
    """Decode a linear path between two models in pre-quantization space.

    Endpoints are included (step 0 is a, step steps-1 is b).  Every step is
    decoded greedily from the blended continuous vectors; steps that fail to
    parse or validate come back as None.
    """
    if steps < 2:
        raise ValueError("need at least 2 interpolation steps")
    rng = rng or np.random.default_rng(0)
    za = encode_vectors(sketch, extrude, model_a)
    zb = encode_vectors(sketch, extrude, model_b)
    out: list[ModelSE | None] = []
    for lam in np.linspace(0.0, 1.0, steps):
        z = {k: (1.0 - lam) * za[k] + lam * zb[k] for k in za}
        mem_s = sketch.memory_from_vectors(
            Tensor(z["topology"][None]), Tensor(z["geometry"][None]))
        mem_e = Tensor(z["extrude"][None])
        out.append(_decode_memories(sketch, extrude, mem_s, mem_e, rng,
                                    nucleus_p=0.9, temperature=0.0))
    return out


def mix_codes(codes_a: dict[str, np.ndarray], codes_b: dict[str, np.ndarray],
              take: set[str]) -> dict[str, np.ndarray]:
    """Code tuple taking the branches in `take` from a, the rest from b."""
    unknown = set(take) - set(BRANCH_ORDER)
    if unknown:
        raise ValueError(f"unknown branches: {sorted(unknown)}")
    return {b: (codes_a if b in take else codes_b)[b] for b in BRANCH_ORDER}


def mix_models(sketch: SketchBranch, extrude: ExtrudeBranch,
               model_a: ModelSE, model_b: ModelSE, take: set[str],
               rng: np.random.Generator | None = None) -> ModelSE | None:
    """Recombine two models at the code level and decode greedily."""
    rng = rng or np.random.default_rng(0)
    ca = encode_model(sketch, extrude, model_a)
    cb = encode_model(sketch, extrude, model_b)
    return decode_codes(sketch, extrude, mix_codes(ca, cb, take), rng)
