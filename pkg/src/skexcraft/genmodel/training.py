"""Training loops for branches and selectors.

Branch training runs the first skip_quant_epochs epochs with quantization
bypassed (the decoder sees raw encoder outputs) so the encoders organize a
usable latent space before the codebooks lock on.  After that, quantization
is active: EMA codebook updates follow every optimizer step and dead codes
are reseeded from batch encoder outputs at a fixed interval.

Training stops early once token accuracy holds at the target for
early_stop_patience consecutive epochs with quantization active.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nn_core.optim import Adam
from .branches import ExtrudeBranch, SketchBranch
from .config import TrainConfig
from .selector import CodeSelector


class DivergedLoss(RuntimeError):
    """Raised when the training loss stops being finite."""


@dataclass
class EpochLog:
    epoch: int
    loss: float
    ce: float
    commit: float
    accuracy: float
    lr: float
    quantized: bool
    reseeded: int


def pad_sequences(seqs: list[list[int]], width: int | None = None):
    """Pad int lists to a (B, T) array; returns (ids, valid, lengths)."""
    lengths = np.array([len(s) for s in seqs], dtype=np.int64)
    T = int(lengths.max()) if width is None else width
    if (lengths > T).any():
        raise ValueError(f"sequence longer than padded width {T}")
    ids = np.zeros((len(seqs), T), dtype=np.int64)
    valid = np.zeros((len(seqs), T), dtype=bool)
    for i, s in enumerate(seqs):
        ids[i, : len(s)] = s
        valid[i, : len(s)] = True
    return ids, valid, lengths


def _sketch_batch(data: dict, idx: np.ndarray) -> dict:
    topo = [data["topo"][i] for i in idx]
    geom = [data["geom"][i] for i in idx]
    t_ids, t_valid, _ = pad_sequences(topo)
    g_ids, g_valid, _ = pad_sequences(geom)
    return {"topo_ids": t_ids, "topo_valid": t_valid,
            "geom_ids": g_ids, "geom_valid": g_valid}


def _extrude_batch(data: dict, idx: np.ndarray) -> dict:
    ext = [data["ext"][i] for i in idx]
    ids, valid, lengths = pad_sequences(ext)
    return {"ext_ids": ids, "ext_valid": valid, "ext_lengths": lengths}


def _check_lengths(data: dict, model) -> None:
    if isinstance(model, SketchBranch):
        cap = model.cfg.max_sketch_len
        worst = max(max(map(len, data["topo"])), max(map(len, data["geom"])))
    else:
        cap = model.cfg.max_extrude_len
        worst = max(map(len, data["ext"]))
    if worst > cap:
        raise ValueError(f"dataset has a {worst}-token view but the model caps at {cap}")


def _run(params: dict, forward, n_samples: int, make_batch, cfg: TrainConfig,
         rng: np.random.Generator, skip_quant_epochs: int,
         verbose: bool = False, warm_start=None) -> list[EpochLog]:
    if n_samples == 0:
        raise ValueError("empty training set")
    opt = Adam(params, lr=cfg.lr, warmup_steps=cfg.warmup_steps,
               clip_norm=cfg.grad_clip)
    history: list[EpochLog] = []
    steady = 0
    batch_counter = 0
    warmed = skip_quant_epochs == 0 or warm_start is None
    for epoch in range(cfg.epochs):
        bypass = epoch < skip_quant_epochs
        if not bypass and not warmed:
            # quantization engages now; seed the codebooks from what the
            # trained encoder actually produces instead of the random init
            warm_start(make_batch(rng.permutation(n_samples)[: cfg.batch_size]))
            warmed = True
        order = rng.permutation(n_samples)
        sums = np.zeros(4)
        reseeded = 0
        n_batches = 0
        for lo in range(0, n_samples, cfg.batch_size):
            idx = order[lo: lo + cfg.batch_size]
            batch = make_batch(idx)
            out = forward(batch, bypass)
            loss = out["loss"]
            if not np.isfinite(loss.data):
                raise DivergedLoss(f"non-finite loss at epoch {epoch}")
            opt.zero_grad()
            loss.backward()
            opt.step()
            for book, z, assigned in out["ema"]:
                book.ema_update(z, assigned)
            if not bypass and out["ema"]:
                batch_counter += 1
                if batch_counter % cfg.reseed_interval == 0:
                    for book, z, _ in out["ema"]:
                        reseeded += book.reseed_dead(z, rng)
            sums += (float(loss.data), out["ce"], out["commit"], out["accuracy"])
            n_batches += 1
        log = EpochLog(
            epoch=epoch,
            loss=sums[0] / n_batches,
            ce=sums[1] / n_batches,
            commit=sums[2] / n_batches,
            accuracy=sums[3] / n_batches,
            lr=opt.current_lr(),
            quantized=not bypass,
            reseeded=reseeded,
        )
        history.append(log)
        if verbose:
            tag = "q" if log.quantized else " "
            print(f"epoch {epoch:4d}{tag} loss {log.loss:.4f} "
                  f"ce {log.ce:.4f} acc {log.accuracy:.4f}")
        if not bypass and log.accuracy >= cfg.early_stop_acc:
            steady += 1
            if steady >= cfg.early_stop_patience:
                break
        else:
            steady = 0
    return history


def train_branch(branch, data: dict, cfg: TrainConfig,
                 rng: np.random.Generator, verbose: bool = False) -> list[EpochLog]:
    """Train a sketch or extrude branch on token views.

    data holds parallel lists: "topo" and "geom" for the sketch branch,
    "ext" for the extrude branch.
    """
    _check_lengths(data, branch)
    if isinstance(branch, SketchBranch):
        n = len(data["geom"])
        make = lambda idx: _sketch_batch(data, idx)
    elif isinstance(branch, ExtrudeBranch):
        n = len(data["ext"])
        make = lambda idx: _extrude_batch(data, idx)
    else:
        raise TypeError(f"not a branch: {type(branch).__name__}")
    forward = lambda batch, bypass: branch.forward_train(
        batch, bypass=bypass, rng=rng, training=True)
    warm = lambda batch: branch.warm_start_codebooks(batch, rng)
    return _run(branch.named_params(), forward, n, make, cfg, rng,
                cfg.skip_quant_epochs, verbose, warm_start=warm)


def train_selector(selector: CodeSelector, tuples: np.ndarray, cfg: TrainConfig,
                   rng: np.random.Generator, verbose: bool = False) -> list[EpochLog]:
    """Train a selector on (N, 10) code index tuples."""
    tuples = np.asarray(tuples, dtype=np.int64)
    if tuples.ndim != 2 or tuples.shape[1] != 10:
        raise ValueError("selector training data must be (N, 10) index tuples")
    make = lambda idx: tuples[idx]
    forward = lambda batch, bypass: selector.forward_train(
        batch, rng=rng, training=True)
    return _run(selector.named_params(), forward, len(tuples), make, cfg, rng,
                skip_quant_epochs=0, verbose=verbose)
