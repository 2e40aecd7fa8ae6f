"""Autodiff engine, transformer blocks, optimizer, sampling, checkpoints.

Every backward rule is verified against central finite differences on
float64 inputs.
"""

import numpy as np
import pytest

from skexcraft.nn_core import (
    Adam,
    Block,
    CheckpointError,
    LayerNorm,
    Linear,
    Module,
    MultiHeadAttention,
    Tensor,
    TransformerStack,
    causal_mask,
    concat,
    cross_entropy,
    dropout,
    embedding_lookup,
    gelu,
    key_padding_mask,
    layer_norm,
    load_checkpoint,
    no_grad,
    nucleus_sample,
    parameter,
    save_checkpoint,
    softmax,
    stack,
    token_accuracy,
)

RNG = np.random.default_rng(41)


def fd_check(build, tensors, eps=1e-6, rtol=2e-4, atol=1e-7, max_coords=12):
    """Compare analytic gradients of a scalar-producing closure against FD."""
    for t in tensors:
        t.grad = None
    out = build()
    assert out.data.shape == (), "fd_check needs a scalar loss"
    out.backward()
    for t in tensors:
        assert t.grad is not None, "missing gradient"
        flat = t.data.reshape(-1)
        gflat = t.grad.reshape(-1)
        idx = RNG.choice(flat.size, size=min(max_coords, flat.size), replace=False)
        for i in idx:
            keep = flat[i]
            flat[i] = keep + eps
            fp = build().item()
            flat[i] = keep - eps
            fm = build().item()
            flat[i] = keep
            num = (fp - fm) / (2 * eps)
            ana = gflat[i]
            assert num == pytest.approx(ana, rel=rtol, abs=atol), (
                f"coord {i}: numeric {num} vs analytic {ana}"
            )


# ---------------------------------------------------------------------------
# primitive ops


def test_grad_arithmetic_broadcast():
    a = parameter(RNG.normal(size=(3, 4)))
    b = parameter(RNG.normal(size=(4,)))
    c = parameter(RNG.normal(size=(3, 1)))
    fd_check(lambda: ((a * b + c) / (b * b + 2.0) - a * 0.3).sum(), [a, b, c])


def test_grad_pow():
    a = parameter(RNG.uniform(0.5, 2.0, size=(5,)))
    fd_check(lambda: (a**3).sum(), [a])


def test_grad_matmul_batched():
    a = parameter(RNG.normal(size=(2, 3, 4)))
    b = parameter(RNG.normal(size=(4, 5)))
    fd_check(lambda: (a @ b).sum(), [a, b])
    c = parameter(RNG.normal(size=(2, 5, 3)))
    fd_check(lambda: ((a @ b) @ c).mean(), [a, b, c])


def test_grad_reshape_transpose_getitem():
    a = parameter(RNG.normal(size=(4, 6)))
    fd_check(lambda: (a.reshape(2, 12).transpose(1, 0)[3:9] ** 2).sum(), [a])


def test_grad_getitem_fancy():
    a = parameter(RNG.normal(size=(5, 3)))
    idx = np.asarray([0, 2, 2, 4])
    fd_check(lambda: (a[idx] * a[idx]).sum(), [a])


def test_grad_concat_stack():
    a = parameter(RNG.normal(size=(2, 3)))
    b = parameter(RNG.normal(size=(2, 2)))
    fd_check(lambda: (concat([a, b], axis=1) ** 2).sum(), [a, b])
    c = parameter(RNG.normal(size=(2, 3)))
    fd_check(lambda: (stack([a, c], axis=0) ** 2).mean(), [a, c])


def test_grad_sum_mean_axis():
    a = parameter(RNG.normal(size=(3, 4, 2)))
    fd_check(lambda: (a.sum(axis=1) ** 2).sum(), [a])
    fd_check(lambda: (a.mean(axis=-1, keepdims=True) * a).sum(), [a])


def test_grad_gelu():
    a = parameter(RNG.normal(size=(4, 5)))
    fd_check(lambda: gelu(a).sum(), [a])
    # spot values: gelu(0)=0, gelu(large)~large
    assert gelu(Tensor([0.0])).data[0] == pytest.approx(0.0)
    assert gelu(Tensor([10.0])).data[0] == pytest.approx(10.0, abs=1e-6)


def test_grad_softmax():
    a = parameter(RNG.normal(size=(3, 6)))
    w = Tensor(RNG.normal(size=(3, 6)))
    fd_check(lambda: (softmax(a) * w).sum(), [a])
    assert softmax(a).data.sum(axis=-1) == pytest.approx(np.ones(3))


def test_grad_layer_norm():
    x = parameter(RNG.normal(size=(2, 3, 8)))
    g = parameter(RNG.uniform(0.5, 1.5, size=(8,)))
    b = parameter(RNG.normal(size=(8,)))
    w = Tensor(RNG.normal(size=(2, 3, 8)))
    fd_check(lambda: (layer_norm(x, g, b) * w).sum(), [x, g, b])
    y = layer_norm(x, parameter(np.ones(8)), parameter(np.zeros(8))).data
    assert y.mean(axis=-1) == pytest.approx(np.zeros((2, 3)), abs=1e-12)
    assert y.std(axis=-1) == pytest.approx(np.ones((2, 3)), rel=1e-3)


def test_grad_embedding_lookup():
    table = parameter(RNG.normal(size=(7, 4)))
    ids = np.asarray([[0, 3, 3], [6, 0, 1]])
    w = Tensor(RNG.normal(size=(2, 3, 4)))
    fd_check(lambda: (embedding_lookup(table, ids) * w).sum(), [table])


def test_grad_cross_entropy_with_ignore():
    logits = parameter(RNG.normal(size=(2, 5, 7)))
    targets = np.asarray([[1, 2, -1, 4, 0], [-1, -1, 6, 3, 2]])
    fd_check(lambda: cross_entropy(logits, targets, ignore_index=-1), [logits])


def test_cross_entropy_matches_closed_form():
    logits = Tensor(np.log(np.asarray([[0.7, 0.2, 0.1]])), requires_grad=True)
    loss = cross_entropy(logits, np.asarray([0]))
    assert loss.item() == pytest.approx(-np.log(0.7))


def test_cross_entropy_all_ignored_raises():
    logits = parameter(RNG.normal(size=(2, 3)))
    with pytest.raises(ValueError):
        cross_entropy(logits, np.asarray([-1, -1]), ignore_index=-1)


def test_grad_dropout():
    x = parameter(RNG.normal(size=(6, 6)))
    fd_check(lambda: dropout(x, 0.4, np.random.default_rng(0), True).sum(), [x])
    # eval mode passes through untouched
    y = dropout(x, 0.4, np.random.default_rng(0), False)
    assert y is x


def test_dropout_scales_kept_entries():
    x = Tensor(np.ones((2000,)))
    y = dropout(x, 0.25, np.random.default_rng(1), True)
    kept = y.data[y.data > 0]
    assert kept[0] == pytest.approx(1 / 0.75)
    assert len(kept) / 2000 == pytest.approx(0.75, abs=0.05)


def test_no_grad_builds_no_graph():
    a = parameter(RNG.normal(size=(3,)))
    with no_grad():
        out = (a * 2).sum()
    assert not out.requires_grad
    assert out._parents == ()


def test_second_backward_accumulates():
    a = parameter(np.asarray([2.0]))
    (a * 3).sum().backward()
    (a * 3).sum().backward()
    assert a.grad[0] == pytest.approx(6.0)


# ---------------------------------------------------------------------------
# transformer pieces


def test_grad_attention_with_masks():
    rng = np.random.default_rng(0)
    attn = MultiHeadAttention(8, 2, rng, p_drop=0.0)
    x = parameter(rng.normal(size=(2, 4, 8)))
    mask = causal_mask(4)
    params = list(attn.named_params().values())
    fd_check(lambda: (attn(x, mask=mask) ** 2).sum(), [x, *params], max_coords=3)


def test_causal_mask_blocks_future():
    rng = np.random.default_rng(0)
    attn = MultiHeadAttention(8, 2, rng, p_drop=0.0)
    x = np.zeros((1, 4, 8))
    x[0, 2] = 1.0  # a signal at position 2
    base = attn(Tensor(x), mask=causal_mask(4)).data
    x2 = x.copy()
    x2[0, 3] = 5.0  # changing position 3 must not affect outputs before it
    pert = attn(Tensor(x2), mask=causal_mask(4)).data
    assert np.allclose(base[0, :3], pert[0, :3])
    assert not np.allclose(base[0, 3], pert[0, 3])


def test_key_padding_mask_ignores_padded_keys():
    rng = np.random.default_rng(0)
    attn = MultiHeadAttention(8, 2, rng, p_drop=0.0)
    x = rng.normal(size=(1, 5, 8))
    valid = np.asarray([[True, True, True, False, False]])
    base = attn(Tensor(x), mask=key_padding_mask(valid)).data
    x2 = x.copy()
    x2[0, 4] = 100.0
    pert = attn(Tensor(x2), mask=key_padding_mask(valid)).data
    assert np.allclose(base[0, :3], pert[0, :3])


def test_grad_full_stack_with_cross_attention():
    rng = np.random.default_rng(0)
    stack_ = TransformerStack(2, 8, 2, 16, rng, p_drop=0.0, cross=True)
    x = parameter(rng.normal(size=(1, 3, 8)))
    mem = parameter(rng.normal(size=(1, 4, 8)))
    tgt = np.asarray([[0, 2, 1]])
    head = Linear(8, 4, rng)

    def loss():
        h = stack_(x, self_mask=causal_mask(3), memory=mem)
        return cross_entropy(head(h), tgt)

    some_params = list(stack_.named_params().values())[::5]
    fd_check(loss, [x, mem, *some_params], max_coords=3)


def test_module_named_params_paths():
    rng = np.random.default_rng(0)
    block = Block(8, 2, 16, rng, 0.1, cross=True)
    names = set(block.named_params())
    assert "attn.wq.w" in names
    assert "cross.wo.b" in names
    assert "ln1.gamma" in names
    assert "ff.l1.w" in names


def test_load_params_shape_check():
    rng = np.random.default_rng(0)
    lin = Linear(3, 2, rng)
    good = {k: v.data for k, v in lin.named_params().items()}
    lin.load_params(good)
    bad = dict(good)
    bad["w"] = np.zeros((2, 3))
    with pytest.raises(ValueError):
        lin.load_params(bad)
    with pytest.raises(KeyError):
        lin.load_params({"w": good["w"]})


# ---------------------------------------------------------------------------
# optimizer


def test_adam_minimizes_quadratic():
    x = parameter(np.asarray([10.0, -4.0]))
    opt = Adam({"x": x}, lr=0.1, clip_norm=None)
    for _ in range(400):
        opt.zero_grad()
        loss = ((x - Tensor(np.asarray([3.0, 1.0]))) ** 2).sum()
        loss.backward()
        opt.step()
    assert x.data == pytest.approx([3.0, 1.0], abs=1e-3)


def test_adam_warmup_schedule():
    x = parameter(np.zeros(1))
    opt = Adam({"x": x}, lr=1e-3, warmup_steps=10)
    assert opt.current_lr() == pytest.approx(1e-4)
    for _ in range(5):
        x.grad = np.ones(1)
        opt.step()
    assert opt.current_lr() == pytest.approx(6e-4)
    for _ in range(10):
        x.grad = np.ones(1)
        opt.step()
    assert opt.current_lr() == pytest.approx(1e-3)


def test_gradient_clipping_caps_global_norm():
    x = parameter(np.zeros(3))
    y = parameter(np.zeros(4))
    opt = Adam({"x": x, "y": y}, clip_norm=1.0)
    x.grad = np.full(3, 10.0)
    y.grad = np.full(4, 10.0)
    norm = opt.clip_gradients()
    assert norm == pytest.approx(np.sqrt(7) * 10)
    clipped = np.sqrt((x.grad**2).sum() + (y.grad**2).sum())
    assert clipped == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# sampling


def test_nucleus_cutoff_excludes_tail():
    logits = np.log(np.asarray([0.5, 0.3, 0.2]))
    rng = np.random.default_rng(0)
    seen = {nucleus_sample(logits, rng, p=0.6) for _ in range(300)}
    assert seen == {0, 1}


def test_nucleus_tiny_p_is_argmax():
    logits = np.asarray([0.1, 3.0, 0.2])
    rng = np.random.default_rng(0)
    assert all(nucleus_sample(logits, rng, p=1e-9) == 1 for _ in range(20))


def test_nucleus_full_p_reaches_all():
    logits = np.log(np.asarray([0.4, 0.35, 0.25]))
    rng = np.random.default_rng(0)
    seen = {nucleus_sample(logits, rng, p=1.0) for _ in range(500)}
    assert seen == {0, 1, 2}


def test_nucleus_never_samples_blocked():
    logits = np.asarray([1.0, -1e9, 0.5])
    rng = np.random.default_rng(0)
    # even at high temperature the blocked class stays out
    draws = {nucleus_sample(logits, rng, p=1.0, temperature=100.0) for _ in range(300)}
    assert 1 not in draws


def test_nucleus_deterministic_under_seed():
    logits = RNG.normal(size=20)
    a = [nucleus_sample(logits, np.random.default_rng(5), p=0.9) for _ in range(10)]
    b = [nucleus_sample(logits, np.random.default_rng(5), p=0.9) for _ in range(10)]
    assert a == b


def test_token_accuracy_ignores_padding():
    logits = Tensor(np.asarray([[[0.0, 2.0], [3.0, 0.0], [0.0, 1.0]]]))
    tgt = np.asarray([[1, 0, -1]])
    assert token_accuracy(logits, tgt, ignore_index=-1) == 1.0


# ---------------------------------------------------------------------------
# checkpoints


def test_checkpoint_roundtrip(tmp_path):
    arrays = {
        "enc.w": RNG.normal(size=(3, 4)),
        "enc.b": RNG.normal(size=(4,)),
        "scalar": np.asarray(2.5),
        "codebook.counts": RNG.uniform(size=(16,)),
    }
    manifest = {"branch": "sketch", "dim": 64, "layout": 1}
    path = tmp_path / "model.skex"
    save_checkpoint(path, manifest, arrays)
    m2, a2 = load_checkpoint(path)
    assert m2 == manifest
    assert set(a2) == set(arrays)
    for k in arrays:
        assert a2[k].shape == arrays[k].shape
        assert np.array_equal(a2[k], arrays[k])


def test_checkpoint_magic_and_truncation(tmp_path):
    path = tmp_path / "bad.skex"
    path.write_bytes(b"NOPE" + b"\x00" * 20)
    with pytest.raises(CheckpointError):
        load_checkpoint(path)
    save_checkpoint(path, {}, {"a": np.ones(5)})
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_checkpoint_starts_with_magic(tmp_path):
    path = tmp_path / "m.skex"
    save_checkpoint(path, {"v": 1}, {})
    assert path.read_bytes()[:4] == b"SKEX"
