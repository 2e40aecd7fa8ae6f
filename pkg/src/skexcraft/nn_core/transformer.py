"""Pre-norm transformer blocks built on the Tensor autodiff engine.

Attention masks are additive: 0 where attention is allowed, -1e9 where it
is blocked (a finite sentinel keeps softmax well-defined even for rows that
are fully blocked).
"""

from __future__ import annotations

import numpy as np

from .functional import dropout, gelu, layer_norm, softmax
from .tensor import Tensor, parameter

MASK_BLOCK = -1e9

INIT_STD = 0.02


class Module:
    """Parameter container; collects trainable tensors by attribute path."""

    def named_params(self, prefix: str = "") -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        for name, val in vars(self).items():
            key = f"{prefix}{name}"
            if isinstance(val, Tensor):
                if val.requires_grad:
                    out[key] = val
            elif isinstance(val, Module):
                out.update(val.named_params(key + "."))
            elif isinstance(val, (list, tuple)):
                for i, item in enumerate(val):
                    if isinstance(item, Module):
                        out.update(item.named_params(f"{key}.{i}."))
                    elif isinstance(item, Tensor) and item.requires_grad:
                        out[f"{key}.{i}"] = item
        return out

    def load_params(self, arrays: dict[str, np.ndarray], prefix: str = "") -> None:
        mine = self.named_params(prefix)
        missing = set(mine) - set(arrays)
        if missing:
            raise KeyError(f"checkpoint is missing parameters: {sorted(missing)[:5]}")
        for name, t in mine.items():
            arr = np.asarray(arrays[name], dtype=t.data.dtype)
            if arr.shape != t.data.shape:
                raise ValueError(
                    f"parameter {name}: checkpoint shape {arr.shape} != model {t.data.shape}"
                )
            t.data = arr.copy()


class Linear(Module):
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator):
        self.w = parameter((n_in, n_out), rng, std=INIT_STD)
        self.b = parameter(np.zeros(n_out))

    def __call__(self, x: Tensor) -> Tensor:
        return x @ self.w + self.b


class LayerNorm(Module):
    def __init__(self, dim: int):
        self.gamma = parameter(np.ones(dim))
        self.beta = parameter(np.zeros(dim))

    def __call__(self, x: Tensor) -> Tensor:
        return layer_norm(x, self.gamma, self.beta)


class MultiHeadAttention(Module):
    def __init__(self, dim: int, n_heads: int, rng: np.random.Generator, p_drop: float):
        if dim % n_heads:
            raise ValueError("model dim must divide evenly into heads")
        self.n_heads = n_heads
        self.head_dim = dim // n_heads
        self.p_drop = p_drop
        self.wq = Linear(dim, dim, rng)
        self.wk = Linear(dim, dim, rng)
        self.wv = Linear(dim, dim, rng)
        self.wo = Linear(dim, dim, rng)

    def _split(self, x: Tensor, B: int, T: int) -> Tensor:
        return x.reshape(B, T, self.n_heads, self.head_dim).transpose(0, 2, 1, 3)

    def __call__(
        self,
        x: Tensor,
        memory: Tensor | None = None,
        mask: np.ndarray | None = None,
        rng: np.random.Generator | None = None,
        training: bool = False,
    ) -> Tensor:
        src = memory if memory is not None else x
        B, Tq = x.shape[0], x.shape[1]
        Tk = src.shape[1]
        q = self._split(self.wq(x), B, Tq)
        k = self._split(self.wk(src), B, Tk)
        v = self._split(self.wv(src), B, Tk)
        scores = (q @ k.transpose(0, 1, 3, 2)) * (1.0 / np.sqrt(self.head_dim))
        if mask is not None:
            scores = scores + Tensor(mask)
        probs = softmax(scores, axis=-1)
        if training and self.p_drop > 0:
            probs = dropout(probs, self.p_drop, rng, training)
        out = (probs @ v).transpose(0, 2, 1, 3).reshape(B, Tq, self.n_heads * self.head_dim)
        return self.wo(out)


class FeedForward(Module):
    def __init__(self, dim: int, hidden: int, rng: np.random.Generator):
        self.l1 = Linear(dim, hidden, rng)
        self.l2 = Linear(hidden, dim, rng)

    def __call__(self, x: Tensor) -> Tensor:
        return self.l2(gelu(self.l1(x)))


class Block(Module):
    """Pre-norm block: self-attention, optional cross-attention, feed-forward."""

    def __init__(
        self,
        dim: int,
        n_heads: int,
        hidden: int,
        rng: np.random.Generator,
        p_drop: float,
        cross: bool = False,
    ):
        self.ln1 = LayerNorm(dim)
        self.attn = MultiHeadAttention(dim, n_heads, rng, p_drop)
        if cross:
            self.ln_x = LayerNorm(dim)
            self.cross = MultiHeadAttention(dim, n_heads, rng, p_drop)
        else:
            self.cross = None
        self.ln2 = LayerNorm(dim)
        self.ff = FeedForward(dim, hidden, rng)
        self.p_drop = p_drop

    def __call__(self, x, self_mask=None, memory=None, memory_mask=None, rng=None, training=False):
        h = self.attn(self.ln1(x), mask=self_mask, rng=rng, training=training)
        x = x + dropout(h, self.p_drop, rng, training)
        if self.cross is not None and memory is not None:
            h = self.cross(self.ln_x(x), memory=memory, mask=memory_mask, rng=rng, training=training)
            x = x + dropout(h, self.p_drop, rng, training)
        h = self.ff(self.ln2(x))
        return x + dropout(h, self.p_drop, rng, training)


class TransformerStack(Module):
    """A stack of pre-norm blocks with a final layer norm."""

    def __init__(
        self,
        n_blocks: int,
        dim: int,
        n_heads: int,
        hidden: int,
        rng: np.random.Generator,
        p_drop: float = 0.1,
        cross: bool = False,
    ):
        self.blocks = [Block(dim, n_heads, hidden, rng, p_drop, cross) for _ in range(n_blocks)]
        self.ln_out = LayerNorm(dim)

    def __call__(self, x, self_mask=None, memory=None, memory_mask=None, rng=None, training=False):
        for b in self.blocks:
            x = b(x, self_mask, memory, memory_mask, rng, training)
        return self.ln_out(x)


def causal_mask(t: int) -> np.ndarray:
    """(t,t) additive mask blocking attention to future positions."""
    return np.triu(np.full((t, t), MASK_BLOCK), k=1)


def key_padding_mask(valid: np.ndarray) -> np.ndarray:
    """(B,Tk) validity -> (B,1,1,Tk) additive mask for batched attention."""
    valid = np.asarray(valid, dtype=bool)
    return np.where(valid, 0.0, MASK_BLOCK)[:, None, None, :]
