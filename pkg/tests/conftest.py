"""Session fixtures: a fully trained toy bundle shared across suites.

Training the toy configuration on the 50-model corpus takes a few minutes,
so it happens once per session.  Set SKEXCRAFT_TEST_BUNDLE to a previously
built bundle directory to reuse it while iterating; tests that assert on
training wall-time skip themselves when the bundle was not trained fresh.
"""

from __future__ import annotations

import itertools
import os
import time
from dataclasses import dataclass, field

import numpy as np
import pytest

from skexcraft.dataset import CorpusSpec, generate_corpus, write_corpus
from skexcraft.genmodel.branches import ExtrudeBranch, SketchBranch
from skexcraft.genmodel.config import TOY_MODEL, TOY_TRAIN, TrainConfig
from skexcraft.genmodel.generate import encode_model, model_views
from skexcraft.genmodel.persist import load_bundle, save_bundle
from skexcraft.genmodel.selector import BRANCH_ORDER, CodeSelector, variant_name
from skexcraft.genmodel.training import train_branch, train_selector

CORPUS_SEED = 0
CORPUS_SIZE = 50

SELECTOR_TRAIN = TrainConfig(
    epochs=400,
    batch_size=25,
    lr=2e-3,
    warmup_steps=60,
    skip_quant_epochs=0,
    early_stop_acc=2.0,  # argmax accuracy saturates long before the
    early_stop_patience=10 ** 6,  # distribution sharpens; run the full budget
)

ALL_VARIANTS = [frozenset(c)
                for r in range(3)
                for c in itertools.combinations(BRANCH_ORDER, r)]


@dataclass
class ToyBundle:
    sketch: SketchBranch
    extrude: ExtrudeBranch
    selectors: dict[str, CodeSelector]
    corpus: list
    views: dict
    tuples: np.ndarray
    bundle_dir: str
    corpus_dir: str
    trained_fresh: bool
    branch_train_seconds: float = 0.0
    sketch_logs: list = field(default_factory=list)
    extrude_logs: list = field(default_factory=list)


def _corpus_and_views():
    corpus = generate_corpus(CorpusSpec(n_models=CORPUS_SIZE),
                             np.random.default_rng(CORPUS_SEED))
    views = {"topo": [], "geom": [], "ext": []}
    for m in corpus:
        t, g, e = model_views(m)
        views["topo"].append(list(t))
        views["geom"].append(list(g))
        views["ext"].append(list(e))
    return corpus, views


def _encode_tuples(sketch, extrude, corpus) -> np.ndarray:
    return np.stack([
        np.concatenate([encode_model(sketch, extrude, m)[b]
                        for b in BRANCH_ORDER])
        for m in corpus])


@pytest.fixture(scope="session")
def toy_bundle(tmp_path_factory) -> ToyBundle:
    corpus, views = _corpus_and_views()
    corpus_dir = tmp_path_factory.mktemp("corpus")
    write_corpus(corpus_dir, corpus, [], [], meta={"seed": CORPUS_SEED})

    cached = os.environ.get("SKEXCRAFT_TEST_BUNDLE")
    if cached and os.path.exists(os.path.join(cached, "bundle.json")):
        b = load_bundle(cached)
        return ToyBundle(
            sketch=b.sketch, extrude=b.extrude, selectors=b.selectors,
            corpus=corpus, views=views,
            tuples=_encode_tuples(b.sketch, b.extrude, corpus),
            bundle_dir=cached, corpus_dir=str(corpus_dir),
            trained_fresh=False)

    rng = np.random.default_rng(TOY_TRAIN.seed)
    t0 = time.time()
    sketch = SketchBranch(TOY_MODEL, rng)
    sketch_logs = train_branch(sketch, views, TOY_TRAIN, rng)
    extrude = ExtrudeBranch(TOY_MODEL, rng)
    extrude_logs = train_branch(extrude, views, TOY_TRAIN, rng)
    branch_seconds = time.time() - t0

    tuples = _encode_tuples(sketch, extrude, corpus)
    selectors = {}
    for variant in ALL_VARIANTS:
        sel = CodeSelector(TOY_MODEL, variant, rng)
        train_selector(sel, tuples, SELECTOR_TRAIN, rng)
        selectors[variant_name(variant)] = sel

    bundle_dir = tmp_path_factory.mktemp("bundle")
    save_bundle(bundle_dir, sketch, extrude, selectors,
                meta={"corpus_seed": CORPUS_SEED, "n_models": CORPUS_SIZE})
    return ToyBundle(
        sketch=sketch, extrude=extrude, selectors=selectors, corpus=corpus,
        views=views, tuples=tuples, bundle_dir=str(bundle_dir),
        corpus_dir=str(corpus_dir), trained_fresh=True,
        branch_train_seconds=branch_seconds,
        sketch_logs=sketch_logs, extrude_logs=extrude_logs)
