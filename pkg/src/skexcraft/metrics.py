"""Generation-quality metrics over sampled surface point clouds.

Chamfer distance uses the squared-L2 convention.  Coverage and minimum
matching distance come from the full pairwise Chamfer matrix between the
generated and reference sets.  The distributional score is Jensen-Shannon
divergence between voxel occupancy histograms of the pooled clouds.
Uniqueness and novelty compare canonical token sequences.

A KD-tree accelerates nearest-neighbor lookups; the O(nm) brute-force path
stays available as an oracle and both are tested against each other.  The
pairwise matrix is computed by a worker pool capped by SKEXCRAFT_THREADS,
with results written by index so the reduction order is deterministic.
"""

from __future__ import annotations

import json
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial import cKDTree

from .genmodel.branches import ExtrudeBranch, SketchBranch
from .genmodel.generate import encode_model
from .genmodel.selector import BRANCH_ORDER
from .genmodel.training import pad_sequences
from .nn_core.optim import Adam
from .nn_core.tensor import Tensor, parameter
from .nn_core.functional import cross_entropy
from .seq_core import tokens as tk
from .seq_core.grammar import dedup_key
from .seq_core.types import ModelSE

DEFAULT_GRID_RES = 28
DEFAULT_N_POINTS = 2000


class EmptyCloud(ValueError):
    pass


class EmptySet(ValueError):
    pass


def max_workers() -> int:
    cap = os.environ.get("SKEXCRAFT_THREADS")
    if cap:
        return max(1, int(cap))
    return min(8, os.cpu_count() or 1)


def _as_cloud(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] == 0:
        raise EmptyCloud("point cloud must be a nonempty (N, D) array")
    return a


def chamfer_brute(a, b) -> float:
    """Reference O(nm) squared-L2 Chamfer distance."""
    a, b = _as_cloud(a), _as_cloud(b)
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
    return float(d2.min(axis=1).mean() + d2.min(axis=0).mean())


def chamfer(a, b) -> float:
    """KD-tree accelerated squared-L2 Chamfer distance."""
    a, b = _as_cloud(a), _as_cloud(b)
    d_ab = cKDTree(b).query(a, k=1)[0]
    d_ba = cKDTree(a).query(b, k=1)[0]
    return float((d_ab ** 2).mean() + (d_ba ** 2).mean())


def pairwise_chamfer(gen_clouds: list[np.ndarray],
                     ref_clouds: list[np.ndarray]) -> np.ndarray:
    """(len(gen), len(ref)) matrix of Chamfer distances.

    Rows are computed in parallel but written by index, so the result does
    not depend on worker scheduling.
    """
    if not gen_clouds or not ref_clouds:
        raise EmptySet("need at least one cloud on each side")
    gens = [_as_cloud(c) for c in gen_clouds]
    refs = [_as_cloud(c) for c in ref_clouds]
    ref_trees = [cKDTree(r) for r in refs]
    out = np.empty((len(gens), len(refs)))

    def row(i: int) -> None:
        g = gens[i]
        g_tree = cKDTree(g)
        for j, (r, r_tree) in enumerate(zip(refs, ref_trees)):
            d_gr = r_tree.query(g, k=1)[0]
            d_rg = g_tree.query(r, k=1)[0]
            out[i, j] = (d_gr ** 2).mean() + (d_rg ** 2).mean()

    workers = max_workers()
    if workers == 1 or len(gens) == 1:
        for i in range(len(gens)):
            row(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(row, range(len(gens))))
    return out


def cov_mmd(gen_clouds, ref_clouds) -> tuple[float, float]:
    """Coverage percent and minimum matching distance from one matrix."""
    d = pairwise_chamfer(gen_clouds, ref_clouds)
    matched = np.unique(d.argmin(axis=1))
    cov = 100.0 * matched.size / d.shape[1]
    mmd = float(d.min(axis=0).mean())
    return cov, mmd


def cov(gen_clouds, ref_clouds) -> float:
    return cov_mmd(gen_clouds, ref_clouds)[0]


def mmd(gen_clouds, ref_clouds) -> float:
    return cov_mmd(gen_clouds, ref_clouds)[1]


def normalize_cloud(points) -> np.ndarray:
    """Uniformly rescale a cloud into the unit cube, centered per axis."""
    p = _as_cloud(points)
    lo = p.min(axis=0)
    hi = p.max(axis=0)
    span = float((hi - lo).max())
    if span <= 0:
        return np.full_like(p, 0.5)
    mid = (lo + hi) / 2.0
    return (p - mid) / span + 0.5


def occupancy_histogram(clouds: list[np.ndarray], grid_res: int) -> np.ndarray:
    """Pooled voxel occupancy distribution over [0,1]^3 (or [0,1]^D)."""
    if not clouds:
        raise EmptySet("no clouds to histogram")
    dim = _as_cloud(clouds[0]).shape[1]
    counts = np.zeros(grid_res ** dim)
    for cloud in clouds:
        c = _as_cloud(cloud)
        idx = np.clip((c * grid_res).astype(np.int64), 0, grid_res - 1)
        flat = np.zeros(len(idx), dtype=np.int64)
        for d in range(dim):
            flat = flat * grid_res + idx[:, d]
        np.add.at(counts, flat, 1)
    total = counts.sum()
    if total == 0:
        raise EmptySet("histogram is empty")
    return counts / total


def jsd_from_histograms(p, q) -> float:
    """Jensen-Shannon divergence in nats; 0*ln0 taken as 0."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    p = p / p.sum()
    q = q / q.sum()
    m = (p + q) / 2.0

    def kl(a, b):
        mask = a > 0
        return float((a[mask] * np.log(a[mask] / b[mask])).sum())

    return 0.5 * kl(p, m) + 0.5 * kl(q, m)


def jsd(gen_clouds, ref_clouds, grid_res: int = DEFAULT_GRID_RES) -> float:
    """JSD between pooled occupancy histograms of two cloud sets."""
    return jsd_from_histograms(occupancy_histogram(gen_clouds, grid_res),
                               occupancy_histogram(ref_clouds, grid_res))


def unique_percent(models: list[ModelSE]) -> float:
    """Percentage of models whose canonical form appears exactly once."""
    if not models:
        raise EmptySet("no models")
    keys = [dedup_key(m) for m in models]
    counts = {}
    for k in keys:
        counts[k] = counts.get(k, 0) + 1
    once = sum(1 for k in keys if counts[k] == 1)
    return 100.0 * once / len(keys)


def novel_percent(models: list[ModelSE], train: list[ModelSE]) -> float:
    """Percentage of models absent from the training set."""
    if not models:
        raise EmptySet("no models")
    seen = {dedup_key(m) for m in train}
    fresh = sum(1 for m in models if dedup_key(m) not in seen)
    return 100.0 * fresh / len(models)


@dataclass
class MetricReport:
    cov_percent: float
    mmd: float
    jsd: float
    unique_percent: float
    novel_percent: float
    validity_percent: float
    n_gen: int
    n_ref: int
    n_points: int
    grid_res: int

    def __post_init__(self):
        for name in ("cov_percent", "unique_percent", "novel_percent",
                     "validity_percent"):
            v = getattr(self, name)
            if not 0.0 <= v <= 100.0:
                raise ValueError(f"{name}={v} outside [0, 100]")
        if self.mmd < 0:
            raise ValueError("mmd must be nonnegative")
        if not 0.0 <= self.jsd <= np.log(2) + 1e-12:
            raise ValueError("jsd outside [0, ln 2]")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @staticmethod
    def from_json(text: str) -> "MetricReport":
        return MetricReport(**json.loads(text))


def evaluate_sets(gen_models: list[ModelSE], ref_models: list[ModelSE],
                  train_models: list[ModelSE], rng: np.random.Generator,
                  n_points: int = DEFAULT_N_POINTS,
                  grid_res: int = DEFAULT_GRID_RES,
                  chord_tol: float = 1e-3,
                  validity_percent: float = 100.0) -> MetricReport:
    """Full report: sample surfaces, normalize, and score both sets."""
    from .geom_kernel import evaluate as geom_eval

    if not gen_models or not ref_models:
        raise EmptySet("need generated and reference models")

    # Per-model cloud seed derives from the canonical key, so the same model
    # always yields the same cloud and identical sets score identically.
    base = int(rng.integers(0, 2 ** 31))

    def clouds(models):
        out = []
        for m in models:
            seed = zlib.crc32(dedup_key(m).encode()) ^ base
            child = np.random.default_rng(seed)
            pts = geom_eval.sample_model_surface(m, n_points, child, chord_tol)
            out.append(normalize_cloud(pts))
        return out

    gen_clouds = clouds(gen_models)
    ref_clouds = clouds(ref_models)
    cov_p, mmd_v = cov_mmd(gen_clouds, ref_clouds)
    return MetricReport(
        cov_percent=cov_p,
        mmd=mmd_v,
        jsd=jsd(gen_clouds, ref_clouds, grid_res),
        unique_percent=unique_percent(gen_models),
        novel_percent=novel_percent(gen_models, train_models),
        validity_percent=validity_percent,
        n_gen=len(gen_models),
        n_ref=len(ref_models),
        n_points=n_points,
        grid_res=grid_res,
    )


def _lenient_topology(geom: list[int]) -> list[int]:
    """Best-effort topology view for a raw geometry token stream.

    Follows the curve-arity rule (1/2/4 points -> line/arc/circle) where the
    stream is well formed and clips malformed runs to the nearest curve kind,
    so streams from an untrained decoder can still feed the topology encoder.
    """
    arity = {1: tk.TOPO_LINE, 2: tk.TOPO_ARC, 4: tk.TOPO_CIRCLE}
    out: list[int] = []
    run = 0
    for c in geom:
        if c < tk.GEOM_END_CURVE:
            run += 1
            continue
        if run:
            out.append(arity.get(run, tk.TOPO_CIRCLE))
            run = 0
        if c != tk.GEOM_END_CURVE:
            out.append(min(c - tk.GEOM_END_CURVE + 2, tk.TOPO_END_SEQ))
    if run:
        out.append(arity.get(run, tk.TOPO_CIRCLE))
    return out or [tk.TOPO_END_SEQ]


def _stream_vectors(sketch: SketchBranch, extrude: ExtrudeBranch,
                    geom: list[int], ext: list[int]) -> dict[str, np.ndarray]:
    """Pre-quantization encoder outputs for raw (geometry, extrude) streams."""
    t_ids, t_valid, _ = pad_sequences([_lenient_topology(geom)])
    g_ids, g_valid, _ = pad_sequences([geom])
    z_tp, z_ge = sketch.encode(t_ids, t_valid, g_ids, g_valid)
    e_ids, e_valid, e_len = pad_sequences([ext])
    z_ex = extrude.encode(e_ids, e_valid, e_len)
    return {"topology": z_tp.data[0], "geometry": z_ge.data[0],
            "extrude": z_ex.data[0]}


def _probe_features(sketch: SketchBranch, extrude: ExtrudeBranch,
                    a: tuple[list[int], list[int]],
                    b: tuple[list[int], list[int]]) -> np.ndarray:
    za = _stream_vectors(sketch, extrude, *a)
    zb = _stream_vectors(sketch, extrude, *b)
    feats = []
    for branch in BRANCH_ORDER:
        feats.append(np.abs(za[branch] - zb[branch]).mean(axis=1))
    return np.concatenate(feats)


def _sample_streams(sketch: SketchBranch, extrude: ExtrudeBranch,
                    codes: dict[str, np.ndarray], rng: np.random.Generator,
                    nucleus_p: float,
                    temperature: float) -> tuple[list[int], list[int]]:
    mem_s = sketch.memory_from_indices(codes["topology"], codes["geometry"])
    mem_e = extrude.memory_from_indices(codes["extrude"])
    geom = sketch.sample(mem_s, rng, nucleus_p, temperature,
                         keep_truncated=True)[0]
    ext = extrude.sample(mem_e, rng, nucleus_p, temperature,
                         keep_truncated=True)[0]
    return list(geom), list(ext)


def probe_pairs(sketch: SketchBranch, extrude: ExtrudeBranch,
                code_pool: list[dict[str, np.ndarray]],
                rng: np.random.Generator, n_pairs: int,
                nucleus_p: float = 0.9, temperature: float = 1.0):
    """Sampled raw-stream pairs sharing exactly one branch's codes.

    Pair label is the index of the shared branch in BRANCH_ORDER.  Both
    members are sampled from code tuples drawn from the pool, with the
    labeled branch's codes copied from the first draw into the second.
    Streams are kept unparsed (and unvalidated) so the same procedure runs
    on untrained checkpoints.
    """
    if len(code_pool) < 2:
        raise EmptySet("need at least two code tuples in the pool")
    pairs = []
    for i in range(n_pairs):
        label = i % len(BRANCH_ORDER)
        fixed = BRANCH_ORDER[label]
        c1 = code_pool[int(rng.integers(0, len(code_pool)))]
        c2 = dict(code_pool[int(rng.integers(0, len(code_pool)))])
        c2[fixed] = c1[fixed]
        s1 = _sample_streams(sketch, extrude, c1, rng, nucleus_p, temperature)
        s2 = _sample_streams(sketch, extrude, c2, rng, nucleus_p, temperature)
        pairs.append((s1, s2, label))
    return pairs


def _train_softmax(x: np.ndarray, y: np.ndarray, rng: np.random.Generator,
                   epochs: int = 300, lr: float = 0.05) -> tuple[Tensor, Tensor]:
    w = parameter((x.shape[1], 3), rng, std=0.02)
    b = parameter(np.zeros(3))
    opt = Adam({"w": w, "b": b}, lr=lr)
    xt = Tensor(x)
    for _ in range(epochs):
        loss = cross_entropy(xt @ w + b, y)
        opt.zero_grad()
        loss.backward()
        opt.step()
    return w, b


def disentanglement_probe(sketch: SketchBranch, extrude: ExtrudeBranch,
                          corpus: list[ModelSE], rng: np.random.Generator,
                          n_pairs: int = 90, pairs=None) -> float:
    """Held-out accuracy of a 3-way classifier over latent pair differences.

    Pairs share exactly one branch's codes; the classifier must name that
    branch from the per-slot mean absolute difference of re-encoded latents.
    The whole procedure (code pool, pair sampling, re-encoding) runs on the
    given checkpoint, so an untrained one serves as the chance-level control.
    `pairs` reuses a previously generated pair list.
    """
    if pairs is None:
        pool = [encode_model(sketch, extrude, m) for m in corpus]
        pairs = probe_pairs(sketch, extrude, pool, rng, n_pairs)
    if len(pairs) < 12:
        raise EmptySet(f"only {len(pairs)} usable probe pairs")
    feats = np.stack([_probe_features(sketch, extrude, a, b)
                      for a, b, _ in pairs])
    labels = np.array([lab for _, _, lab in pairs], dtype=np.int64)

    order = rng.permutation(len(pairs))
    n_test = max(3, len(pairs) // 3)
    test_idx, train_idx = order[:n_test], order[n_test:]
    mu = feats[train_idx].mean(axis=0)
    sd = feats[train_idx].std(axis=0) + 1e-8
    xs = (feats - mu) / sd
    w, b = _train_softmax(xs[train_idx], labels[train_idx], rng)
    logits = xs[test_idx] @ w.data + b.data
    return float((logits.argmax(axis=1) == labels[test_idx]).mean())
