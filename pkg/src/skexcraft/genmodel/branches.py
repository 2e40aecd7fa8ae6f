"""Encoder/decoder branches over the token views.

The sketch branch carries two encoders (topology and geometry views) feeding
two codebooks, and one decoder that generates the geometry view while
cross-attending over all six quantized codes.  Code-role embeddings are added
to the quantized vectors so the decoder can tell which slot a code fills.
The topology view of a generated sketch is recovered from curve arities, so
the decoder never produces it directly.

The extrude branch has one encoder (with token-type embeddings keyed off the
fixed 19-token block template) feeding one codebook, and a decoder whose
sampling is template-masked: each position only permits the classes the block
layout allows there.
"""

from __future__ import annotations

import numpy as np

from ..nn_core.functional import cross_entropy, embedding_lookup, token_accuracy
from ..nn_core.sampling import nucleus_sample
from ..nn_core.tensor import Tensor, concat, no_grad, parameter
from ..nn_core.transformer import (
    INIT_STD,
    Linear,
    MASK_BLOCK,
    Module,
    TransformerStack,
    causal_mask,
    key_padding_mask,
)
from ..seq_core import tokens as tk
from .codebook import Codebook
from .config import ModelConfig

# extrude token-type ids by block offset: heights, rotation, origin, scale,
# boolean, block end; the final sequence token gets its own type
N_EXT_TYPES = 7
_EXT_TYPE_BY_OFFSET = np.array([0, 0] + [1] * 9 + [2] * 3 + [3] * 3 + [4, 5])
EXT_TYPE_END = 6


def extrude_type_ids(ids: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Token-type ids for a padded batch of extrude sequences.

    Positions cycle through the block template; the last token of each
    sequence (the end marker) gets the dedicated end type.  Padded positions
    get type 0; they are masked out of attention anyway.
    """
    B, T = ids.shape
    pos = np.arange(T)
    types = np.tile(_EXT_TYPE_BY_OFFSET[pos % tk.EXT_BLOCK_LEN], (B, 1))
    rows = np.arange(B)
    last = np.asarray(lengths, dtype=np.int64) - 1
    types[rows, last] = EXT_TYPE_END
    return types


def extrude_allowed_classes(step: int) -> np.ndarray:
    """Class ids the extrude block template permits at emission step `step`."""
    offset = step % tk.EXT_BLOCK_LEN
    if offset == 0:
        allowed = list(range(tk.GRID))
        if step > 0:
            allowed.append(tk.EXT_END_SEQ)
        return np.array(allowed)
    if offset == 1 or 11 <= offset <= 16:
        return np.arange(tk.GRID)
    if 2 <= offset <= 10:
        return np.array([tk.EXT_ROT_NEG, tk.EXT_ROT_ZERO, tk.EXT_ROT_POS])
    if offset == 17:
        return np.array([tk.EXT_BOOL_UNION, tk.EXT_BOOL_INTERSECT, tk.EXT_BOOL_SUBTRACT])
    return np.array([tk.EXT_END_EXTRUDE])


class SeqEncoder(Module):
    """Maps a padded token batch to n_queries latent vectors per sequence.

    Learnable query embeddings are appended to the embedded tokens; after
    full self-attention the outputs at the query slots are the latents.
    """

    def __init__(self, vocab: int, max_len: int, n_queries: int, dim: int,
                 n_heads: int, n_blocks: int, hidden: int,
                 rng: np.random.Generator, p_drop: float, n_types: int = 0):
        self.dim = dim
        self.n_queries = n_queries
        self.tok = parameter((vocab, dim), rng, std=INIT_STD)
        self.pos = parameter((max_len, dim), rng, std=INIT_STD)
        self.queries = parameter((n_queries, dim), rng, std=INIT_STD)
        self.type_emb = parameter((n_types, dim), rng, std=INIT_STD) if n_types else None
        self.stack = TransformerStack(n_blocks, dim, n_heads, hidden, rng, p_drop)

    def __call__(self, ids: np.ndarray, valid: np.ndarray,
                 type_ids: np.ndarray | None = None,
                 rng: np.random.Generator | None = None,
                 training: bool = False) -> Tensor:
        B, T = ids.shape
        x = embedding_lookup(self.tok, ids) + self.pos[:T]
        if self.type_emb is not None:
            if type_ids is None:
                raise ValueError("encoder was built with token types; pass type_ids")
            x = x + embedding_lookup(self.type_emb, type_ids)
        q = Tensor(np.zeros((B, self.n_queries, self.dim))) + self.queries
        x = concat([x, q], axis=1)
        keep = np.concatenate(
            [np.asarray(valid, bool), np.ones((B, self.n_queries), bool)], axis=1)
        y = self.stack(x, self_mask=key_padding_mask(keep), rng=rng, training=training)
        return y[:, T:, :]


class SeqDecoder(Module):
    """Autoregressive decoder conditioned on latent codes via cross-attention.

    Input slot 0 holds only the start position embedding; slot j holds the
    embedding of token j-1 plus position j.  Slot j predicts token j.
    """

    def __init__(self, vocab: int, max_len: int, dim: int, n_heads: int,
                 n_blocks: int, hidden: int, rng: np.random.Generator,
                 p_drop: float):
        self.dim = dim
        self.vocab = vocab
        self.tok = parameter((vocab, dim), rng, std=INIT_STD)
        self.pos = parameter((max_len, dim), rng, std=INIT_STD)
        self.stack = TransformerStack(n_blocks, dim, n_heads, hidden, rng,
                                      p_drop, cross=True)
        self.head = Linear(dim, vocab, rng)

    def _inputs(self, ids: np.ndarray, n_slots: int) -> Tensor:
        B = ids.shape[0]
        start = Tensor(np.zeros((B, 1, self.dim)))
        if n_slots == 1:
            inp = start
        else:
            prev = embedding_lookup(self.tok, ids[:, : n_slots - 1])
            inp = concat([start, prev], axis=1)
        return inp + self.pos[:n_slots]

    def __call__(self, ids: np.ndarray, memory: Tensor,
                 rng: np.random.Generator | None = None,
                 training: bool = False) -> Tensor:
        """Teacher-forced logits (B, T, vocab) for every target position."""
        B, T = ids.shape
        inp = self._inputs(ids, T)
        y = self.stack(inp, self_mask=causal_mask(T), memory=memory,
                       rng=rng, training=training)
        return self.head(y)

    def next_logits(self, ids: np.ndarray, memory: Tensor) -> np.ndarray:
        """Logits for the next token after the prefix `ids` (B, t)."""
        t = ids.shape[1] + 1
        inp = self._inputs(ids, t)
        y = self.stack(inp, self_mask=causal_mask(t), memory=memory)
        return self.head(y[:, t - 1, :]).data


def sample_sequences(decoder: SeqDecoder, memory: Tensor, end_token: int,
                     rng: np.random.Generator, max_len: int,
                     nucleus_p: float = 0.9, temperature: float = 1.0,
                     allowed_fn=None,
                     keep_truncated: bool = False) -> list[list[int] | None]:
    """Sample one sequence per memory row; None where max_len hit first.

    allowed_fn(step) -> array of permitted class ids for that emission step;
    all other classes are blocked before sampling.  The step index is shared
    across the batch, which is valid for templates with fixed block length.
    keep_truncated returns max-length rows as-is instead of None, for callers
    that analyze raw streams rather than parse them.
    """
    B = memory.shape[0]
    ids = np.zeros((B, 0), dtype=np.int64)
    done = np.zeros(B, dtype=bool)
    with no_grad():
        for step in range(max_len):
            logits = decoder.next_logits(ids, memory)
            if allowed_fn is not None:
                block = np.full(logits.shape[-1], MASK_BLOCK)
                block[allowed_fn(step)] = 0.0
                logits = logits + block
            nxt = np.empty(B, dtype=np.int64)
            for b in range(B):
                if done[b]:
                    nxt[b] = end_token
                else:
                    nxt[b] = nucleus_sample(logits[b], rng, nucleus_p, temperature)
            ids = np.concatenate([ids, nxt[:, None]], axis=1)
            done |= nxt == end_token
            if done.all():
                break
    out: list[list[int] | None] = []
    for b in range(B):
        row = ids[b]
        ends = np.flatnonzero(row == end_token)
        if ends.size == 0:
            out.append(row.tolist() if keep_truncated else None)
        else:
            out.append(row[: ends[0] + 1].tolist())
    return out


class SketchBranch(Module):
    """Topology and geometry encoders, two codebooks, geometry decoder."""

    def __init__(self, cfg: ModelConfig, rng: np.random.Generator):
        self.cfg = cfg
        d, h, nb, ff, pd = cfg.dim, cfg.n_heads, cfg.n_blocks, cfg.ff_hidden, cfg.dropout
        L = cfg.max_sketch_len
        self.topo_enc = SeqEncoder(tk.TOPO_VOCAB, L, cfg.n_topo_codes, d, h, nb, ff, rng, pd)
        self.geom_enc = SeqEncoder(tk.GEOM_VOCAB, L, cfg.n_geom_codes, d, h, nb, ff, rng, pd)
        self.topo_book = Codebook(cfg.topo_codebook, d, rng)
        self.geom_book = Codebook(cfg.geom_codebook, d, rng)
        # code-role embeddings: rows 0..3 tag topology codes, 4..5 geometry
        self.code_tag = parameter((cfg.n_sketch_codes, d), rng, std=INIT_STD)
        self.dec = SeqDecoder(tk.GEOM_VOCAB, L, d, h, nb, ff, rng, pd)

    @property
    def codebooks(self) -> dict[str, Codebook]:
        return {"topo_book": self.topo_book, "geom_book": self.geom_book}

    def encode(self, topo_ids, topo_valid, geom_ids, geom_valid,
               rng=None, training=False) -> tuple[Tensor, Tensor]:
        z_tp = self.topo_enc(topo_ids, topo_valid, rng=rng, training=training)
        z_ge = self.geom_enc(geom_ids, geom_valid, rng=rng, training=training)
        return z_tp, z_ge

    def memory_from_vectors(self, z_tp: Tensor, z_ge: Tensor) -> Tensor:
        return concat([z_tp, z_ge], axis=1) + self.code_tag

    def memory_from_indices(self, tp_idx: np.ndarray, ge_idx: np.ndarray) -> Tensor:
        """Decoder memory for one code assignment; both index arrays 1-D."""
        z_tp = Tensor(self.topo_book.lookup(tp_idx)[None, :, :])
        z_ge = Tensor(self.geom_book.lookup(ge_idx)[None, :, :])
        return self.memory_from_vectors(z_tp, z_ge)

    def encode_indices(self, topo_ids, topo_valid, geom_ids, geom_valid):
        """Codebook assignments for a padded batch; (B,4) and (B,2)."""
        with no_grad():
            z_tp, z_ge = self.encode(topo_ids, topo_valid, geom_ids, geom_valid)
        B = topo_ids.shape[0]
        tp = self.topo_book.assign(z_tp.data.reshape(-1, self.cfg.dim)).reshape(B, -1)
        ge = self.geom_book.assign(z_ge.data.reshape(-1, self.cfg.dim)).reshape(B, -1)
        return tp, ge

    def warm_start_codebooks(self, batch: dict, rng: np.random.Generator) -> None:
        """Seed both books from current encoder outputs on one batch."""
        with no_grad():
            z_tp, z_ge = self.encode(batch["topo_ids"], batch["topo_valid"],
                                     batch["geom_ids"], batch["geom_valid"])
        self.topo_book.warm_start(z_tp.data, rng)
        self.geom_book.warm_start(z_ge.data, rng)

    def forward_train(self, batch: dict, bypass: bool,
                      rng: np.random.Generator, training: bool = True) -> dict:
        topo_ids, topo_valid = batch["topo_ids"], batch["topo_valid"]
        geom_ids, geom_valid = batch["geom_ids"], batch["geom_valid"]
        z_tp, z_ge = self.encode(topo_ids, topo_valid, geom_ids, geom_valid,
                                 rng=rng, training=training)
        ema = []
        if bypass:
            mem = self.memory_from_vectors(z_tp, z_ge)
            commit = Tensor(0.0)
            monitor = 0.0
        else:
            q_tp, i_tp, c_tp, m_tp = self.topo_book.straight_through(z_tp)
            q_ge, i_ge, c_ge, m_ge = self.geom_book.straight_through(z_ge)
            mem = self.memory_from_vectors(q_tp, q_ge)
            commit = c_tp + c_ge
            monitor = m_tp + m_ge
            ema = [(self.topo_book, z_tp.data, i_tp),
                   (self.geom_book, z_ge.data, i_ge)]
        logits = self.dec(geom_ids, mem, rng=rng, training=training)
        targets = np.where(geom_valid, geom_ids, -1)
        ce = cross_entropy(logits, targets, ignore_index=-1)
        return {
            "loss": ce + commit,
            "ce": float(ce.data),
            "commit": float(commit.data),
            "codebook_mse": monitor,
            "accuracy": token_accuracy(logits, targets, ignore_index=-1),
            "ema": ema,
        }

    def sample(self, memory: Tensor, rng: np.random.Generator,
               nucleus_p: float = 0.9, temperature: float = 1.0,
               keep_truncated: bool = False) -> list[list[int] | None]:
        return sample_sequences(self.dec, memory, tk.GEOM_END_SEQ, rng,
                                self.cfg.max_sketch_len, nucleus_p, temperature,
                                keep_truncated=keep_truncated)


class ExtrudeBranch(Module):
    """Single encoder and codebook over extrude blocks, template-masked decoder."""

    def __init__(self, cfg: ModelConfig, rng: np.random.Generator):
        self.cfg = cfg
        d, h, nb, ff, pd = cfg.dim, cfg.n_heads, cfg.n_blocks, cfg.ff_hidden, cfg.dropout
        L = cfg.max_extrude_len
        self.enc = SeqEncoder(tk.EXT_VOCAB, L, cfg.n_ext_codes, d, h, nb, ff,
                              rng, pd, n_types=N_EXT_TYPES)
        self.book = Codebook(cfg.ext_codebook, d, rng)
        self.dec = SeqDecoder(tk.EXT_VOCAB, L, d, h, nb, ff, rng, pd)

    @property
    def codebooks(self) -> dict[str, Codebook]:
        return {"book": self.book}

    def encode(self, ids, valid, lengths, rng=None, training=False) -> Tensor:
        types = extrude_type_ids(ids, lengths)
        return self.enc(ids, valid, type_ids=types, rng=rng, training=training)

    def memory_from_indices(self, idx: np.ndarray) -> Tensor:
        return Tensor(self.book.lookup(idx)[None, :, :])

    def encode_indices(self, ids, valid, lengths) -> np.ndarray:
        with no_grad():
            z = self.encode(ids, valid, lengths)
        return self.book.assign(z.data.reshape(-1, self.cfg.dim)).reshape(ids.shape[0], -1)

    def warm_start_codebooks(self, batch: dict, rng: np.random.Generator) -> None:
        with no_grad():
            z = self.encode(batch["ext_ids"], batch["ext_valid"],
                            batch["ext_lengths"])
        self.book.warm_start(z.data, rng)

    def forward_train(self, batch: dict, bypass: bool,
                      rng: np.random.Generator, training: bool = True) -> dict:
        ids, valid, lengths = batch["ext_ids"], batch["ext_valid"], batch["ext_lengths"]
        z = self.encode(ids, valid, lengths, rng=rng, training=training)
        ema = []
        if bypass:
            mem = z
            commit = Tensor(0.0)
            monitor = 0.0
        else:
            q, idx, commit, monitor = self.book.straight_through(z)
            mem = q
            ema = [(self.book, z.data, idx)]
        logits = self.dec(ids, mem, rng=rng, training=training)
        targets = np.where(valid, ids, -1)
        ce = cross_entropy(logits, targets, ignore_index=-1)
        return {
            "loss": ce + commit,
            "ce": float(ce.data),
            "commit": float(commit.data),
            "codebook_mse": monitor,
            "accuracy": token_accuracy(logits, targets, ignore_index=-1),
            "ema": ema,
        }

    def sample(self, memory: Tensor, rng: np.random.Generator,
               nucleus_p: float = 0.9, temperature: float = 1.0,
               keep_truncated: bool = False) -> list[list[int] | None]:
        return sample_sequences(self.dec, memory, tk.EXT_END_SEQ, rng,
                                self.cfg.max_extrude_len, nucleus_p, temperature,
                                allowed_fn=extrude_allowed_classes,
                                keep_truncated=keep_truncated)
