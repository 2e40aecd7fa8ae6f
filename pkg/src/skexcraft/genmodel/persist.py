"""Saving and loading trained branches and selectors.

Checkpoints carry a manifest describing what they are (branch kind or
selector variant), the model configuration needed to rebuild the network,
and the token class-layout version.  Loading rejects any mismatch instead of
reinterpreting arrays under the wrong layout.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from ..nn_core.checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .branches import ExtrudeBranch, SketchBranch
from .config import CLASS_LAYOUT_VERSION, ModelConfig
from .selector import CodeSelector, variant_from_name, variant_name


def _manifest(kind: str, cfg: ModelConfig, extra: dict | None = None) -> dict:
    m = {
        "kind": kind,
        "class_layout_version": CLASS_LAYOUT_VERSION,
        "model": asdict(cfg),
    }
    if extra:
        m.update(extra)
    return m


def _config_from_manifest(manifest: dict) -> ModelConfig:
    raw = manifest.get("model")
    if not isinstance(raw, dict):
        raise CheckpointError("manifest has no model config")
    known = {f.name for f in fields(ModelConfig)}
    unknown = set(raw) - known
    if unknown:
        raise CheckpointError(f"manifest has unknown config keys: {sorted(unknown)}")
    return ModelConfig(**raw)


def _check_layout(manifest: dict) -> None:
    got = manifest.get("class_layout_version")
    if got != CLASS_LAYOUT_VERSION:
        raise CheckpointError(
            f"checkpoint uses class layout {got}, this build expects "
            f"{CLASS_LAYOUT_VERSION}")


def _collect(model) -> dict[str, np.ndarray]:
    arrays = {k: v.data for k, v in model.named_params().items()}
    for name, book in getattr(model, "codebooks", {}).items():
        arrays.update(book.state_arrays(name))
    return arrays


def save_branch(path, branch) -> None:
    if isinstance(branch, SketchBranch):
        kind = "sketch"
    elif isinstance(branch, ExtrudeBranch):
        kind = "extrude"
    else:
        raise TypeError(f"not a branch: {type(branch).__name__}")
    save_checkpoint(path, _manifest(kind, branch.cfg), _collect(branch))


def load_branch(path, expect_kind: str | None = None):
    manifest, arrays = load_checkpoint(path)
    _check_layout(manifest)
    kind = manifest.get("kind")
    if expect_kind is not None and kind != expect_kind:
        raise CheckpointError(f"expected a {expect_kind} branch, found {kind!r}")
    cfg = _config_from_manifest(manifest)
    rng = np.random.default_rng(0)
    if kind == "sketch":
        branch = SketchBranch(cfg, rng)
    elif kind == "extrude":
        branch = ExtrudeBranch(cfg, rng)
    else:
        raise CheckpointError(f"unknown checkpoint kind {kind!r}")
    branch.load_params(arrays)
    for name, book in branch.codebooks.items():
        book.load_state(arrays, name)
    return branch


def save_selector(path, selector: CodeSelector) -> None:
    extra = {"variant": variant_name(selector.variant)}
    save_checkpoint(path, _manifest("selector", selector.cfg, extra),
                    _collect(selector))


def load_selector(path) -> CodeSelector:
    manifest, arrays = load_checkpoint(path)
    _check_layout(manifest)
    if manifest.get("kind") != "selector":
        raise CheckpointError(f"expected a selector, found {manifest.get('kind')!r}")
    cfg = _config_from_manifest(manifest)
    variant = variant_from_name(manifest.get("variant", "none"))
    selector = CodeSelector(cfg, variant, np.random.default_rng(0))
    selector.load_params(arrays)
    return selector


@dataclass
class Bundle:
    """A directory of trained artifacts: both branches plus selectors.

    Selectors are keyed by variant name ("none" is the unconditional one).
    Everything needed to sample, encode, decode, interpolate and mix.
    """
    sketch: SketchBranch
    extrude: ExtrudeBranch
    selectors: dict[str, CodeSelector]
    meta: dict

    def selector_for(self, condition_branches) -> CodeSelector:
        name = variant_name(frozenset(condition_branches))
        if name not in self.selectors:
            raise CheckpointError(
                f"bundle has no selector for condition {name!r}; "
                f"available: {sorted(self.selectors)}")
        return self.selectors[name]


def save_bundle(bundle_dir, sketch: SketchBranch, extrude: ExtrudeBranch,
                selectors: dict[str, CodeSelector],
                meta: dict | None = None) -> None:
    out = Path(bundle_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_branch(out / "sketch.skex", sketch)
    save_branch(out / "extrude.skex", extrude)
    for name, sel in selectors.items():
        if name != variant_name(sel.variant):
            raise ValueError(f"selector keyed {name!r} has variant "
                             f"{variant_name(sel.variant)!r}")
        save_selector(out / f"selector-{name}.skex", sel)
    doc = {"version": CLASS_LAYOUT_VERSION,
           "selectors": sorted(selectors), **(meta or {})}
    (out / "bundle.json").write_text(json.dumps(doc, indent=2) + "\n")


def load_bundle(bundle_dir) -> Bundle:
    root = Path(bundle_dir)
    if not (root / "bundle.json").exists():
        raise CheckpointError(f"no bundle.json under {root}")
    meta = json.loads((root / "bundle.json").read_text())
    sketch = load_branch(root / "sketch.skex", expect_kind="sketch")
    extrude = load_branch(root / "extrude.skex", expect_kind="extrude")
    selectors = {}
    for name in meta.get("selectors", []):
        selectors[name] = load_selector(root / f"selector-{name}.skex")
    return Bundle(sketch=sketch, extrude=extrude, selectors=selectors,
                  meta=meta)
