"""Nucleus (top-p) sampling over logits."""

from __future__ import annotations

import numpy as np


def nucleus_sample(
    logits: np.ndarray,
    rng: np.random.Generator,
    p: float = 0.9,
    temperature: float = 1.0,
) -> int:
    """Sample one class from the smallest probability mass reaching p.

    Classes are ranked by probability (stable order for ties); the nucleus
    is the shortest prefix whose cumulative probability is >= p, always
    including at least the top class.  Fully blocked logits (<= -1e8) never
    get sampled even when temperature reshapes the distribution.
    """
    logits = np.asarray(logits, dtype=np.float64).reshape(-1)
    if temperature <= 0:
        return int(logits.argmax())
    x = logits / temperature
    x = x - x.max()
    probs = np.exp(x)
    probs[logits <= -1e8] = 0.0
    total = probs.sum()
    if total <= 0:
        raise ValueError("all classes are blocked")
    probs /= total
    order = np.argsort(-probs, kind="stable")
    cum = np.cumsum(probs[order])
    k = int(np.searchsorted(cum, min(p, 1.0)) + 1)
    k = min(k, len(order))
    kept = order[:k]
    kp = probs[kept]
    kp /= kp.sum()
    return int(rng.choice(kept, p=kp))
