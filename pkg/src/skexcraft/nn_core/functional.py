"""Fused neural-network operations on Tensors.

The hot operations (softmax, layer norm, cross entropy, GELU, embedding
lookup) carry hand-written backward rules instead of being composed from
arithmetic primitives, which keeps graphs small.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

from .tensor import Tensor, _unbroadcast

_SQRT2 = np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def gelu(x: Tensor) -> Tensor:
    a = x
    xd = a.data
    phi = 0.5 * (1.0 + erf(xd / _SQRT2))

    def bw(g):
        if a.requires_grad:
            density = _INV_SQRT_2PI * np.exp(-0.5 * xd * xd)
            a._accumulate(g * (phi + xd * density))

    return Tensor._make(xd * phi, (a,), bw)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    a = x
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)

    def bw(g):
        if a.requires_grad:
            inner = (g * y).sum(axis=axis, keepdims=True)
            a._accumulate((g - inner) * y)

    return Tensor._make(y, (a,), bw)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    a, gm, bt = x, gamma, beta
    xd = a.data
    mu = xd.mean(axis=-1, keepdims=True)
    diff = xd - mu
    var = (diff * diff).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = diff * inv
    out = gm.data * xhat + bt.data

    def bw(g):
        d = xd.shape[-1]
        if gm.requires_grad:
            gm._accumulate(_unbroadcast(g * xhat, gm.data.shape))
        if bt.requires_grad:
            bt._accumulate(_unbroadcast(g, bt.data.shape))
        if a.requires_grad:
            gx = g * gm.data
            s1 = gx.sum(axis=-1, keepdims=True)
            s2 = (gx * xhat).sum(axis=-1, keepdims=True)
            a._accumulate(inv * (gx - s1 / d - xhat * s2 / d))

    return Tensor._make(out, (a, gm, bt), bw)


def embedding_lookup(table: Tensor, ids: np.ndarray) -> Tensor:
    t = table
    ids = np.asarray(ids, dtype=np.int64)

    def bw(g):
        if t.requires_grad:
            full = np.zeros_like(t.data)
            np.add.at(full, ids.reshape(-1), g.reshape(-1, t.data.shape[-1]))
            t._accumulate(full)

    return Tensor._make(t.data[ids], (t,), bw)


def cross_entropy(logits: Tensor, targets: np.ndarray, ignore_index: int | None = None) -> Tensor:
    """Mean negative log likelihood over non-ignored targets.

    logits: (..., V); targets: integer array of the leading shape.  Rows
    whose target equals ignore_index contribute nothing to loss or gradient.
    Returns a scalar Tensor; raises ValueError when every row is ignored.
    """
    a = logits
    v = a.data.shape[-1]
    flat = a.data.reshape(-1, v)
    tgt = np.asarray(targets, dtype=np.int64).reshape(-1)
    if ignore_index is not None:
        valid = tgt != ignore_index
    else:
        valid = np.ones_like(tgt, dtype=bool)
    n_valid = int(valid.sum())
    if n_valid == 0:
        raise ValueError("cross_entropy: every target is ignored")
    shifted = flat - flat.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=-1)) + flat.max(axis=-1)
    safe_tgt = np.where(valid, tgt, 0)
    nll = lse - flat[np.arange(len(tgt)), safe_tgt]
    loss = nll[valid].sum() / n_valid

    def bw(g):
        if a.requires_grad:
            p = np.exp(shifted)
            p /= p.sum(axis=-1, keepdims=True)
            p[np.arange(len(tgt)), safe_tgt] -= 1.0
            p[~valid] = 0.0
            a._accumulate((float(g) / n_valid) * p.reshape(a.data.shape))

    return Tensor._make(np.asarray(loss), (a,), bw)


def dropout(x: Tensor, p: float, rng: np.random.Generator, training: bool) -> Tensor:
    if not training or p <= 0.0:
        return x
    a = x
    scale = 1.0 / (1.0 - p)
    mask = (rng.random(a.data.shape) >= p) * scale

    def bw(g):
        if a.requires_grad:
            a._accumulate(g * mask)

    return Tensor._make(a.data * mask, (a,), bw)


def token_accuracy(logits: Tensor, targets: np.ndarray, ignore_index: int | None = None) -> float:
    """Fraction of non-ignored positions whose argmax matches the target."""
    pred = logits.data.argmax(axis=-1).reshape(-1)
    tgt = np.asarray(targets, dtype=np.int64).reshape(-1)
    valid = tgt != ignore_index if ignore_index is not None else np.ones_like(tgt, bool)
    if not valid.any():
        return 0.0
    return float((pred[valid] == tgt[valid]).mean())
