"""Metric oracles: Chamfer dual-route check, COV/MMD/JSD identities."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skexcraft.dataset import CorpusSpec, generate_corpus
from skexcraft.genmodel import ExtrudeBranch, ModelConfig, SketchBranch, model_views
from skexcraft.metrics import (
    EmptyCloud,
    EmptySet,
    MetricReport,
    _lenient_topology,
    probe_pairs,
    chamfer,
    chamfer_brute,
    cov_mmd,
    evaluate_sets,
    jsd,
    jsd_from_histograms,
    normalize_cloud,
    novel_percent,
    occupancy_histogram,
    pairwise_chamfer,
    unique_percent,
)


def test_chamfer_hand_case():
    # one point each, unit apart: 1^2 + 1^2 = 2 under the squared convention
    assert chamfer_brute([[0.0, 0.0, 0.0]], [[1.0, 0.0, 0.0]]) == 2.0
    assert chamfer([[0.0, 0.0, 0.0]], [[1.0, 0.0, 0.0]]) == 2.0


def test_chamfer_two_point_hand_case():
    a = [[0.0, 0.0], [1.0, 0.0]]
    b = [[0.0, 1.0]]
    # a->b: (1 + 2)/2; b->a: 1
    expected = 1.5 + 1.0
    assert abs(chamfer_brute(a, b) - expected) < 1e-12
    assert abs(chamfer(a, b) - expected) < 1e-12


def test_chamfer_accelerated_matches_brute_200_pairs():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(200):
        a = rng.normal(size=(int(rng.integers(1, 60)), 3))
        b = rng.normal(size=(int(rng.integers(1, 60)), 3))
        worst = max(worst, abs(chamfer(a, b) - chamfer_brute(a, b)))
    assert worst < 1e-9


def test_chamfer_rejects_empty():
    with pytest.raises(EmptyCloud):
        chamfer(np.zeros((0, 3)), np.ones((4, 3)))
    with pytest.raises(EmptyCloud):
        chamfer_brute(np.ones((4, 3)), [])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 20), st.integers(1, 20), st.integers(0, 2**31 - 1))
def test_chamfer_properties(n, m, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, 3))
    b = rng.normal(size=(m, 3))
    assert chamfer(a, b) == pytest.approx(chamfer(b, a), abs=1e-12)
    assert chamfer(a, a) == pytest.approx(0.0, abs=1e-12)
    assert abs(chamfer(a, b) - chamfer_brute(a, b)) < 1e-9


def test_identity_set_gives_perfect_scores():
    rng = np.random.default_rng(1)
    clouds = [rng.random((80, 3)) for _ in range(6)]
    cov_p, mmd_v = cov_mmd(clouds, clouds)
    assert cov_p == 100.0
    assert mmd_v == 0.0
    assert jsd(clouds, clouds) < 1e-12


def test_single_generated_model_coverage():
    rng = np.random.default_rng(2)
    refs = [rng.random((30, 3)) for _ in range(5)]
    cov_p, _ = cov_mmd([refs[2]], refs)
    assert cov_p == 100.0 / len(refs)


def test_mmd_hand_case():
    a = np.array([[0.0, 0.0, 0.0]])
    b = np.array([[1.0, 0.0, 0.0]])
    _, mmd_v = cov_mmd([a], [a, b])
    assert mmd_v == pytest.approx((0.0 + 2.0) / 2)


def test_pairwise_matrix_deterministic_across_thread_counts(monkeypatch):
    rng = np.random.default_rng(3)
    gens = [rng.random((40, 3)) for _ in range(7)]
    refs = [rng.random((40, 3)) for _ in range(5)]
    monkeypatch.setenv("SKEXCRAFT_THREADS", "1")
    one = pairwise_chamfer(gens, refs)
    monkeypatch.setenv("SKEXCRAFT_THREADS", "4")
    four = pairwise_chamfer(gens, refs)
    assert np.array_equal(one, four)


def test_pairwise_rejects_empty_sets():
    with pytest.raises(EmptySet):
        pairwise_chamfer([], [np.zeros((1, 3))])


def test_occupancy_histogram_counts_voxels():
    # grid 2: corner points land in voxels 0 and 7
    cloud = np.array([[0.1, 0.1, 0.1], [0.9, 0.9, 0.9], [0.9, 0.9, 0.9]])
    h = occupancy_histogram([cloud], grid_res=2)
    assert h.shape == (8,)
    assert h[0] == pytest.approx(1 / 3)
    assert h[7] == pytest.approx(2 / 3)
    assert h.sum() == pytest.approx(1.0)


def test_occupancy_clamps_boundary_points():
    h = occupancy_histogram([np.array([[1.0, 1.0, 1.0]])], grid_res=4)
    assert h[-1] == 1.0


def test_jsd_hand_case():
    assert jsd_from_histograms([1.0, 0.0], [0.5, 0.5]) == pytest.approx(
        0.215762, abs=1e-4)


def test_jsd_bounds():
    assert jsd_from_histograms([0.3, 0.7], [0.3, 0.7]) == pytest.approx(0.0)
    assert jsd_from_histograms([1.0, 0.0], [0.0, 1.0]) == pytest.approx(
        np.log(2))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 10.0), min_size=2, max_size=8),
       st.lists(st.floats(0.01, 10.0), min_size=2, max_size=8))
def test_jsd_symmetric_and_bounded(p, q):
    n = min(len(p), len(q))
    p, q = p[:n], q[:n]
    v = jsd_from_histograms(p, q)
    assert 0.0 <= v <= np.log(2) + 1e-12
    assert v == pytest.approx(jsd_from_histograms(q, p), abs=1e-12)


def test_normalize_cloud_fits_unit_cube():
    rng = np.random.default_rng(4)
    p = rng.normal(5.0, 3.0, size=(50, 3))
    q = normalize_cloud(p)
    assert q.min() >= 0.0 and q.max() <= 1.0
    # longest axis spans the full cube; aspect ratio is preserved
    spans = q.max(axis=0) - q.min(axis=0)
    assert spans.max() == pytest.approx(1.0)
    orig = p.max(axis=0) - p.min(axis=0)
    assert np.allclose(spans / spans.max(), orig / orig.max())


def test_normalize_degenerate_cloud():
    q = normalize_cloud(np.full((5, 3), 2.5))
    assert np.all(q == 0.5)


@pytest.fixture(scope="module")
def models():
    return generate_corpus(CorpusSpec(n_models=12), np.random.default_rng(5))


def test_unique_percent_counts_duplicates(models):
    assert unique_percent(models) == 100.0
    ten = models[:9] + [models[0]]
    assert unique_percent(ten) == 80.0


def test_novel_percent(models):
    train = models[:6]
    gen = models[4:10]
    assert novel_percent(gen, train) == pytest.approx(100.0 * 4 / 6)
    assert novel_percent(gen, []) == 100.0


def test_unique_rejects_empty():
    with pytest.raises(EmptySet):
        unique_percent([])


def test_report_roundtrip_and_validation():
    r = MetricReport(cov_percent=50.0, mmd=0.1, jsd=0.2, unique_percent=100.0,
                     novel_percent=90.0, validity_percent=85.0, n_gen=10,
                     n_ref=10, n_points=2000, grid_res=28)
    assert MetricReport.from_json(r.to_json()) == r
    with pytest.raises(ValueError):
        MetricReport(cov_percent=150.0, mmd=0.1, jsd=0.2, unique_percent=0.0,
                     novel_percent=0.0, validity_percent=0.0, n_gen=1,
                     n_ref=1, n_points=1, grid_res=28)
    with pytest.raises(ValueError):
        MetricReport(cov_percent=50.0, mmd=-0.1, jsd=0.2, unique_percent=0.0,
                     novel_percent=0.0, validity_percent=0.0, n_gen=1,
                     n_ref=1, n_points=1, grid_res=28)
    with pytest.raises(ValueError):
        MetricReport(cov_percent=50.0, mmd=0.1, jsd=1.0, unique_percent=0.0,
                     novel_percent=0.0, validity_percent=0.0, n_gen=1,
                     n_ref=1, n_points=1, grid_res=28)


def test_evaluate_sets_identity(models):
    rng = np.random.default_rng(6)
    report = evaluate_sets(models[:4], models[:4], models[:2], rng,
                           n_points=400, grid_res=16)
    assert report.cov_percent == 100.0
    assert report.mmd == 0.0
    assert report.jsd < 1e-12
    assert report.unique_percent == 100.0
    assert report.novel_percent == 50.0
    assert report.n_gen == report.n_ref == 4
    assert report.grid_res == 16


# ---------------------------------------------------------------------------
# disentanglement probe plumbing (accuracy thresholds live in the
# acceptance suite; here we check the mechanics on untrained branches)


TINY = ModelConfig(dim=16, n_heads=2, n_blocks=1, ff_hidden=32, dropout=0.0,
                   topo_codebook=6, geom_codebook=8, ext_codebook=8,
                   max_sketch_len=40, max_extrude_len=24)


def test_lenient_topology_matches_strict_on_valid_views(models):
    for m in models[:6]:
        topo, geom, _ = model_views(m)
        assert _lenient_topology(list(geom)) == list(topo)


def test_lenient_topology_tolerates_garbage():
    # unterminated 3-pixel run, then a run of 7, then a bare end-sequence
    stream = [5, 9, 12, 4096, 1, 1, 1, 1, 1, 1, 1, 4100]
    out = _lenient_topology(stream)
    assert out == [2, 2, 6]
    assert _lenient_topology([]) == [6]


def test_probe_pairs_label_cycle_and_streams():
    rng = np.random.default_rng(0)
    sketch = SketchBranch(TINY, rng)
    extrude = ExtrudeBranch(TINY, rng)
    pool = [
        {"topology": np.array([0, 1, 2, 3]), "geometry": np.array([0, 1]),
         "extrude": np.array([0, 1, 2, 3])},
        {"topology": np.array([3, 2, 1, 0]), "geometry": np.array([1, 0]),
         "extrude": np.array([3, 2, 1, 0])},
    ]
    pairs = probe_pairs(sketch, extrude, pool, rng, n_pairs=6)
    assert [label for _, _, label in pairs] == [0, 1, 2, 0, 1, 2]
    for (g1, e1), (g2, e2), _ in pairs:
        assert len(g1) > 0 and len(g2) > 0
        assert len(e1) > 0 and len(e2) > 0


def test_probe_pairs_rejects_tiny_pool():
    rng = np.random.default_rng(0)
    sketch = SketchBranch(TINY, rng)
    extrude = ExtrudeBranch(TINY, rng)
    with pytest.raises(EmptySet):
        probe_pairs(sketch, extrude, [], rng, n_pairs=3)
