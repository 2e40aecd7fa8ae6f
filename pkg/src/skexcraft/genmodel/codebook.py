"""Vector-quantization codebook with exponential-moving-average updates.

The codebook itself is not trained by gradient descent: code vectors track
the running mean of the encoder outputs assigned to them (decay 0.99, counts
Laplace-smoothed).  The encoder still receives a commitment gradient, and the
quantized vectors pass gradients straight through to the encoder outputs.
"""

from __future__ import annotations

import numpy as np

from ..nn_core.tensor import Tensor

EMA_DECAY = 0.99
LAPLACE_EPS = 1e-5
COMMITMENT_BETA = 0.25
DEAD_CODE_THRESHOLD = 1e-3


class Codebook:
    """K code vectors of width dim, updated by EMA over assigned vectors."""

    def __init__(self, n_codes: int, dim: int, rng: np.random.Generator,
                 decay: float = EMA_DECAY, beta: float = COMMITMENT_BETA):
        self.n_codes = n_codes
        self.dim = dim
        self.decay = decay
        self.beta = beta
        self.embed = rng.normal(0.0, 0.02, size=(n_codes, dim))
        # running assignment counts and vector sums; counts start at 1 so a
        # freshly initialized book behaves as if each code had one sample
        self.cluster_size = np.ones(n_codes)
        self.embed_sum = self.embed.copy()

    def assign(self, z: np.ndarray) -> np.ndarray:
        """Nearest code index for each row of z, ties to the lowest index."""
        z = np.asarray(z, dtype=np.float64)
        d = (
            (z * z).sum(axis=1, keepdims=True)
            - 2.0 * z @ self.embed.T
            + (self.embed * self.embed).sum(axis=1)[None, :]
        )
        return np.argmin(d, axis=1)

    def lookup(self, indices: np.ndarray) -> np.ndarray:
        return self.embed[np.asarray(indices, dtype=np.int64)]

    def straight_through(self, z: Tensor):
        """Quantize rows of z (flattened over leading dims).

        Returns (quantized Tensor with pass-through gradient, flat indices,
        commitment loss Tensor, codebook loss float).  The codebook loss is
        reported for monitoring only; EMA handles the codes.
        """
        flat = z.data.reshape(-1, self.dim)
        idx = self.assign(flat)
        target = self.embed[idx].reshape(z.shape)

        # forward: target; backward: identity to z
        delta = Tensor(target - z.data)
        z_q = z + delta

        diff = z - Tensor(target)
        commit = (diff * diff).mean() * self.beta
        codebook_loss = float(np.mean((flat - self.embed[idx]) ** 2))
        return z_q, idx, commit, codebook_loss

    def ema_update(self, z: np.ndarray, indices: np.ndarray) -> None:
        z = np.asarray(z, dtype=np.float64).reshape(-1, self.dim)
        indices = np.asarray(indices, dtype=np.int64)
        counts = np.bincount(indices, minlength=self.n_codes).astype(np.float64)
        sums = np.zeros_like(self.embed_sum)
        np.add.at(sums, indices, z)

        self.cluster_size = self.decay * self.cluster_size + (1 - self.decay) * counts
        self.embed_sum = self.decay * self.embed_sum + (1 - self.decay) * sums

        total = self.cluster_size.sum()
        smoothed = (
            (self.cluster_size + LAPLACE_EPS)
            / (total + self.n_codes * LAPLACE_EPS)
            * total
        )
        self.embed = self.embed_sum / smoothed[:, None]

    def warm_start(self, z: np.ndarray, rng: np.random.Generator) -> None:
        """Seed every code from encoder outputs before quantization engages.

        The random init has tiny norm, so all encoder outputs would snap to
        a handful of codes and the EMA counts decay far too slowly (0.99^t)
        for dead-code reseeding to rescue the rest within a training run.
        Jitter keeps duplicated picks from tying forever when the batch has
        fewer rows than the book has codes.
        """
        z = np.asarray(z, dtype=np.float64).reshape(-1, self.dim)
        if z.shape[0] == 0:
            return
        replace = z.shape[0] < self.n_codes
        picks = rng.choice(z.shape[0], size=self.n_codes, replace=replace)
        self.embed = z[picks] + rng.normal(0.0, 0.01, size=self.embed.shape)
        self.embed_sum = self.embed.copy()
        self.cluster_size = np.ones(self.n_codes)

    def reseed_dead(self, z: np.ndarray, rng: np.random.Generator,
                    threshold: float = DEAD_CODE_THRESHOLD) -> int:
        """Reinitialize codes whose running count decayed below threshold.

        Dead codes jump to random rows of the current batch of encoder
        outputs.  Returns how many codes were reseeded.
        """
        z = np.asarray(z, dtype=np.float64).reshape(-1, self.dim)
        dead = np.flatnonzero(self.cluster_size < threshold)
        if dead.size == 0 or z.shape[0] == 0:
            return 0
        picks = rng.integers(0, z.shape[0], size=dead.size)
        self.embed[dead] = z[picks]
        self.embed_sum[dead] = z[picks]
        self.cluster_size[dead] = 1.0
        return int(dead.size)

    def perplexity(self, indices: np.ndarray) -> float:
        """exp(entropy) of the batch assignment histogram; K means all used."""
        counts = np.bincount(np.asarray(indices, dtype=np.int64),
                             minlength=self.n_codes).astype(np.float64)
        p = counts / max(counts.sum(), 1.0)
        nz = p[p > 0]
        return float(np.exp(-(nz * np.log(nz)).sum()))

    def state_arrays(self, prefix: str) -> dict:
        return {
            f"{prefix}.embed": self.embed,
            f"{prefix}.cluster_size": self.cluster_size,
            f"{prefix}.embed_sum": self.embed_sum,
        }

    def load_state(self, arrays: dict, prefix: str) -> None:
        for name in ("embed", "cluster_size", "embed_sum"):
            key = f"{prefix}.{name}"
            if key not in arrays:
                raise KeyError(f"checkpoint missing codebook array {key!r}")
            value = np.asarray(arrays[key], dtype=np.float64)
            if value.shape != getattr(self, name).shape:
                raise ValueError(
                    f"{key}: shape {value.shape} != {getattr(self, name).shape}")
            setattr(self, name, value.copy())
