"""Autoregressive selector over codebook index tuples.

A trained model represents each shape as ten code indices: four topology,
two geometry, four extrude.  The selector generates those tuples in that
fixed slot order.  A selector variant conditions on the indices of a subset
of branches (supplied via cross-attention) and generates the rest; the
unconditioned variant generates all ten.

Each slot's logits are masked down to the size of the codebook that slot
draws from, since the output head is sized to the largest codebook.
"""

from __future__ import annotations

import numpy as np

from ..nn_core.functional import cross_entropy, embedding_lookup, token_accuracy
from ..nn_core.sampling import nucleus_sample
from ..nn_core.tensor import Tensor, no_grad, parameter
from ..nn_core.transformer import INIT_STD, MASK_BLOCK, Module
from .branches import SeqDecoder
from .config import ModelConfig

BRANCH_ORDER = ("topology", "geometry", "extrude")
_SHORT = {"topology": "tp", "geometry": "ge", "extrude": "ex"}
_LONG = {v: k for k, v in _SHORT.items()}

N_SLOTS = 10


def variant_name(variant: frozenset[str]) -> str:
    """Stable file-name fragment for a conditioning set; {} -> "none"."""
    if not variant:
        return "none"
    return "-".join(_SHORT[b] for b in BRANCH_ORDER if b in variant)


def variant_from_name(name: str) -> frozenset[str]:
    if name == "none":
        return frozenset()
    parts = name.split("-")
    bad = [p for p in parts if p not in _LONG]
    if bad or len(set(parts)) != len(parts):
        raise ValueError(f"bad selector variant name {name!r}")
    return frozenset(_LONG[p] for p in parts)


class CodeSelector(Module):
    """One selector network for one conditioning variant."""

    def __init__(self, cfg: ModelConfig, variant: frozenset[str],
                 rng: np.random.Generator):
        unknown = set(variant) - set(BRANCH_ORDER)
        if unknown:
            raise ValueError(f"unknown branches in variant: {sorted(unknown)}")
        self.cfg = cfg
        self.variant = frozenset(variant)
        d = cfg.dim
        self.dec = SeqDecoder(cfg.selector_vocab, N_SLOTS, d, cfg.n_heads,
                              cfg.n_blocks, cfg.ff_hidden, rng, cfg.dropout)
        # memory rows reuse the value embedding table; this adds which slot
        # the conditioned value occupies
        self.mem_pos = parameter((N_SLOTS, d), rng, std=INIT_STD)

        sizes = ([cfg.topo_codebook] * cfg.n_topo_codes
                 + [cfg.geom_codebook] * cfg.n_geom_codes
                 + [cfg.ext_codebook] * cfg.n_ext_codes)
        self.slot_sizes = np.array(sizes)
        spans = {
            "topology": range(0, cfg.n_topo_codes),
            "geometry": range(cfg.n_topo_codes, cfg.n_topo_codes + cfg.n_geom_codes),
            "extrude": range(cfg.n_topo_codes + cfg.n_geom_codes, N_SLOTS),
        }
        self.branch_slots = {b: np.array(list(spans[b])) for b in BRANCH_ORDER}
        self.conditioned_slots = np.concatenate(
            [self.branch_slots[b] for b in BRANCH_ORDER if b in self.variant]
        ) if self.variant else np.array([], dtype=np.int64)

        mask = np.zeros((N_SLOTS, cfg.selector_vocab))
        for s, size in enumerate(sizes):
            mask[s, size:] = MASK_BLOCK
        self.slot_mask = mask

    @staticmethod
    def join_parts(parts: dict[str, np.ndarray]) -> np.ndarray:
        """Assemble (B, 10) tuples from per-branch index arrays."""
        cols = [np.asarray(parts[b], dtype=np.int64).reshape(len(parts[b]), -1)
                for b in BRANCH_ORDER]
        return np.concatenate(cols, axis=1)

    def split_tuple(self, tup: np.ndarray) -> dict[str, np.ndarray]:
        tup = np.asarray(tup, dtype=np.int64)
        return {b: tup[..., self.branch_slots[b]] for b in BRANCH_ORDER}

    def _memory(self, tuples: np.ndarray) -> Tensor | None:
        """Cross-attention memory from the conditioned slots of (B, 10)."""
        if self.conditioned_slots.size == 0:
            return None
        vals = tuples[:, self.conditioned_slots]
        emb = embedding_lookup(self.dec.tok, vals)
        return emb + self.mem_pos[self.conditioned_slots]

    def forward_train(self, tuples: np.ndarray, rng: np.random.Generator,
                      training: bool = True) -> dict:
        tuples = np.asarray(tuples, dtype=np.int64)
        mem = self._memory(tuples)
        logits = self.dec(tuples, mem, rng=rng, training=training)
        logits = logits + Tensor(self.slot_mask)
        targets = tuples.copy()
        if self.conditioned_slots.size:
            targets[:, self.conditioned_slots] = -1
        ce = cross_entropy(logits, targets, ignore_index=-1)
        return {
            "loss": ce,
            "ce": float(ce.data),
            "commit": 0.0,
            "codebook_mse": 0.0,
            "accuracy": token_accuracy(logits, targets, ignore_index=-1),
            "ema": [],
        }

    def sample(self, rng: np.random.Generator,
               given: dict[str, np.ndarray] | None = None,
               nucleus_p: float = 0.9, temperature: float = 1.0) -> dict[str, np.ndarray]:
        """Generate one full code tuple, forcing conditioned slots to `given`.

        given maps each branch in the variant to its index array (4/2/4 long).
        Returns all three branches' indices.
        """
        given = given or {}
        missing = self.variant - set(given)
        if missing:
            raise ValueError(f"variant requires codes for {sorted(missing)}")
        forced = np.zeros(N_SLOTS, dtype=np.int64)
        for b in self.variant:
            idx = np.asarray(given[b], dtype=np.int64)
            if idx.shape != (len(self.branch_slots[b]),):
                raise ValueError(f"{b}: expected {len(self.branch_slots[b])} indices")
            forced[self.branch_slots[b]] = idx
        is_forced = np.zeros(N_SLOTS, dtype=bool)
        is_forced[self.conditioned_slots] = True

        mem = self._memory(forced[None, :]) if self.variant else None
        ids = np.zeros((1, 0), dtype=np.int64)
        with no_grad():
            for slot in range(N_SLOTS):
                if is_forced[slot]:
                    val = int(forced[slot])
                else:
                    logits = self.dec.next_logits(ids, mem)[0] + self.slot_mask[slot]
                    val = nucleus_sample(logits, rng, nucleus_p, temperature)
                ids = np.concatenate([ids, [[val]]], axis=1)
        return self.split_tuple(ids[0])
