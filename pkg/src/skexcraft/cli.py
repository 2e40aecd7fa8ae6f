"""Command-line entry point: one subcommand per pipeline stage.

Every stochastic subcommand takes an explicit --seed, so repeated runs with
identical flags reproduce byte-identical outputs.  --json switches stdout to
a stable machine-readable schema; errors exit 1 with a single diagnostic
line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .dataset import (
    CorpusSpec,
    augment,
    generate_corpus,
    read_jsonl,
    split_corpus,
    write_corpus,
    write_jsonl,
)
from .genmodel.config import (
    CLASS_LAYOUT_VERSION,
    FULL_MODEL,
    TOY_MODEL,
    TOY_TRAIN,
    TrainConfig,
    load_config,
)
from .genmodel.generate import (
    encode_model,
    generate,
    interpolate,
    mix_models,
    model_views,
)
from .genmodel.persist import (
    load_branch,
    load_bundle,
    save_branch,
    save_selector,
)
from .genmodel.selector import BRANCH_ORDER, CodeSelector
from .genmodel.training import train_branch, train_selector
from .genmodel.branches import ExtrudeBranch, SketchBranch
from .seq_core.types import ModelSE, model_from_json, model_to_json
from .seq_core.validate import validate


def _write_out(path, text: str) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)


def _load_model(path) -> ModelSE:
    return model_from_json(json.loads(Path(path).read_text()))


def _load_models(path):
    p = Path(path)
    if p.suffix == ".jsonl":
        return read_jsonl(p)
    return [_load_model(p)]


def _emit(args, doc: dict, human: str) -> None:
    if args.json:
        print(json.dumps(doc, indent=2))
    else:
        print(human)


def _model_doc(model) -> dict | None:
    return model_to_json(model) if model is not None else None


def cmd_gen_data(args) -> int:
    spec = CorpusSpec(n_models=args.n, max_steps=args.max_steps,
                      two_step_fraction=args.two_step_frac)
    rng = np.random.default_rng(args.seed)
    models = generate_corpus(spec, rng)
    if args.augment > 0:
        extra = []
        for m in models:
            for _ in range(args.augment):
                extra.append(augment(m, rng))
        models = models + extra
    train, val, test = split_corpus(models, rng, args.val_frac, args.test_frac)
    write_corpus(args.out, train, val, test,
                 meta={"seed": args.seed, "n_requested": args.n})
    doc = {"out": str(args.out), "train": len(train), "val": len(val),
           "test": len(test)}
    _emit(args, doc, f"wrote {len(train)}/{len(val)}/{len(test)} "
                     f"train/val/test models to {args.out}")
    return 0


def cmd_validate(args) -> int:
    models = _load_models(args.file)
    all_diags = []
    for i, m in enumerate(models):
        for d in validate(m):
            all_diags.append({"model": i, "rule": d.rule, "path": d.path,
                              "message": d.message})
    if args.json:
        print(json.dumps({"valid": not all_diags, "diagnostics": all_diags},
                         indent=2))
    else:
        for d in all_diags:
            print(f"model {d['model']}: {d['rule']} at {d['path']}: "
                  f"{d['message']}")
        if not all_diags:
            print(f"{len(models)} model(s) valid")
    return 1 if all_diags else 0


def cmd_tokenize(args) -> int:
    views = [model_views(m) for m in _load_models(args.file)]
    docs = [{"topology": list(t), "geometry": list(g), "extrude": list(e)}
            for t, g, e in views]
    if args.json:
        print(json.dumps(docs if len(docs) > 1 else docs[0], indent=2))
    else:
        for i, d in enumerate(docs):
            for name in ("topology", "geometry", "extrude"):
                print(f"{i} {name}: {' '.join(map(str, d[name]))}")
    if args.out:
        _write_out(args.out, json.dumps(docs) + "\n")
    return 0


def cmd_render(args) -> int:
    from .geom_kernel.evaluate import model_to_obj, model_to_svgs

    model = _load_model(args.file)
    wrote = []
    if args.out:
        _write_out(args.out, model_to_obj(model, tol=args.chord_tol))
        wrote.append(str(args.out))
    if args.svg_dir:
        out = Path(args.svg_dir)
        out.mkdir(parents=True, exist_ok=True)
        for i, svg in enumerate(model_to_svgs(model)):
            p = out / f"sketch_{i}.svg"
            p.write_text(svg)
            wrote.append(str(p))
    if not wrote:
        raise ValueError("render needs --out OBJ path and/or --svg-dir")
    _emit(args, {"wrote": wrote}, "wrote " + ", ".join(wrote))
    return 0


def _corpus_views(corpus_dir) -> tuple[list, dict]:
    from .dataset import read_corpus

    models = read_corpus(corpus_dir)["train"]
    if not models:
        raise ValueError(f"no training models under {corpus_dir}")
    topo, geom, ext = [], [], []
    for m in models:
        t, g, e = model_views(m)
        topo.append(list(t))
        geom.append(list(g))
        ext.append(list(e))
    return models, {"topo": topo, "geom": geom, "ext": ext}


def _train_cfg(args) -> TrainConfig:
    if args.config:
        _, tcfg = load_config(args.config)
    else:
        tcfg = TOY_TRAIN if args.preset == "toy" else TrainConfig()
    overrides = {}
    if args.epochs is not None:
        overrides["epochs"] = args.epochs
    if args.lr is not None:
        overrides["lr"] = args.lr
    if args.batch_size is not None:
        overrides["batch_size"] = args.batch_size
    overrides["seed"] = args.seed
    from dataclasses import replace
    return replace(tcfg, **overrides)


def cmd_train(args) -> int:
    mcfg = TOY_MODEL if args.preset == "toy" else FULL_MODEL
    if args.config:
        mcfg, _ = load_config(args.config)
    tcfg = _train_cfg(args)
    rng = np.random.default_rng(args.seed)
    models, views = _corpus_views(args.data)

    if args.branch in ("sketch", "extrude"):
        branch = (SketchBranch if args.branch == "sketch" else ExtrudeBranch)(
            mcfg, rng)
        logs = train_branch(branch, views, tcfg, rng, verbose=not args.json)
        save_branch(args.out, branch)
    else:
        if not args.sketch_ckpt or not args.extrude_ckpt:
            raise ValueError("selector training needs --sketch-ckpt and "
                             "--extrude-ckpt")
        sketch = load_branch(args.sketch_ckpt, expect_kind="sketch")
        extrude = load_branch(args.extrude_ckpt, expect_kind="extrude")
        tuples = np.stack([
            np.concatenate([encode_model(sketch, extrude, m)[b]
                            for b in BRANCH_ORDER])
            for m in models])
        condition = frozenset() if args.condition == "none" else frozenset(
            args.condition.split(","))
        selector = CodeSelector(mcfg, condition, rng)
        logs = train_selector(selector, tuples, tcfg, rng,
                              verbose=not args.json)
        save_selector(args.out, selector)

    last = logs[-1]
    doc = {"branch": args.branch, "out": str(args.out),
           "epochs_run": len(logs), "final_loss": last.loss,
           "final_accuracy": last.accuracy}
    _emit(args, doc, f"trained {args.branch} for {len(logs)} epochs "
                     f"(loss {last.loss:.4f}, acc {last.accuracy:.4f}) "
                     f"-> {args.out}")
    return 0


def cmd_bundle(args) -> int:
    root = Path(args.dir)
    for req in ("sketch.skex", "extrude.skex"):
        if not (root / req).exists():
            raise FileNotFoundError(f"{root / req} is missing")
    names = sorted(p.stem[len("selector-"):]
                   for p in root.glob("selector-*.skex"))
    if not names:
        raise FileNotFoundError(f"no selector-*.skex files under {root}")
    doc = {"version": CLASS_LAYOUT_VERSION, "selectors": names}
    (root / "bundle.json").write_text(json.dumps(doc, indent=2) + "\n")
    load_bundle(root)  # everything must load together before we report success
    _emit(args, {"dir": str(root), "selectors": names},
          f"bundled sketch + extrude + {len(names)} selector(s) "
          f"-> {root / 'bundle.json'}")
    return 0


def cmd_sample(args) -> int:
    bundle = load_bundle(args.ckpt)
    rng = np.random.default_rng(args.seed)
    selector = bundle.selector_for(frozenset())
    result = generate(bundle.sketch, bundle.extrude, selector, args.n, rng,
                      nucleus_p=args.nucleus_p)
    if args.out:
        write_jsonl(args.out, result.models)
    doc = {"n": len(result.models), "n_attempts": result.n_attempts,
           "validity_percent": 100.0 * result.validity_rate,
           "models": [_model_doc(m) for m in result.models]}
    if args.out:
        doc["out"] = str(args.out)
    _emit(args, doc,
          f"sampled {len(result.models)} models in {result.n_attempts} "
          f"attempts (validity {100.0 * result.validity_rate:.1f}%)")
    return 0


def cmd_interpolate(args) -> int:
    bundle = load_bundle(args.ckpt)
    a = _load_model(args.model_a)
    b = _load_model(args.model_b)
    rng = np.random.default_rng(args.seed)
    steps = interpolate(bundle.sketch, bundle.extrude, a, b, args.steps, rng)
    doc = {"steps": [_model_doc(m) for m in steps]}
    if args.out:
        _write_out(args.out, json.dumps(doc) + "\n")
    valid = sum(1 for m in steps if m is not None)
    _emit(args, doc, f"{valid}/{len(steps)} interpolation steps decoded")
    return 0


def cmd_mix(args) -> int:
    bundle = load_bundle(args.ckpt)
    a = _load_model(args.model_a)
    b = _load_model(args.model_b)
    take = _parse_take(args.take)
    rng = np.random.default_rng(args.seed)
    model = mix_models(bundle.sketch, bundle.extrude, a, b, take, rng)
    doc = {"take_from_a": sorted(take), "model": _model_doc(model)}
    if args.out and model is not None:
        _write_out(args.out, json.dumps(model_to_json(model)) + "\n")
    _emit(args, doc, "mix decoded" if model is not None else
          "mix produced no valid model")
    return 0


def _parse_take(spec: str) -> set[str]:
    take = set()
    for part in spec.split(","):
        if "=" not in part:
            raise ValueError(f"bad --take entry {part!r}; "
                             "use branch=A or branch=B")
        branch, src = part.split("=", 1)
        if branch not in BRANCH_ORDER or src not in ("A", "B"):
            raise ValueError(f"bad --take entry {part!r}")
        if src == "A":
            take.add(branch)
    return take


def cmd_eval(args) -> int:
    from .metrics import evaluate_sets

    gen = _load_models(args.gen)
    ref = _load_models(args.ref)
    train = _load_models(args.train) if args.train else []
    rng = np.random.default_rng(args.seed)
    report = evaluate_sets(gen, ref, train, rng, n_points=args.n_points,
                           grid_res=args.grid, chord_tol=args.chord_tol,
                           validity_percent=args.validity_percent)
    if args.json:
        print(report.to_json())
    else:
        print(f"COV {report.cov_percent:.1f}%  MMD {report.mmd:.5f}  "
              f"JSD {report.jsd:.4f}  unique {report.unique_percent:.1f}%  "
              f"novel {report.novel_percent:.1f}%")
    if args.out:
        _write_out(args.out, report.to_json() + "\n")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .serve import create_app

    app = create_app(args.ckpt)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="skexcraft")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        sp = sub.add_parser(name, **kw)
        sp.set_defaults(fn=fn)
        sp.add_argument("--json", action="store_true",
                        help="machine-readable stdout")
        return sp

    sp = add("gen-data", cmd_gen_data, help="generate a synthetic corpus")
    sp.add_argument("--out", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--max-steps", type=int, default=2)
    sp.add_argument("--two-step-frac", type=float, default=0.45)
    sp.add_argument("--val-frac", type=float, default=0.05)
    sp.add_argument("--test-frac", type=float, default=0.05)
    sp.add_argument("--augment", type=int, default=0,
                    help="jittered copies per model")

    sp = add("validate", cmd_validate, help="check model files against "
                                            "construction rules")
    sp.add_argument("file")

    sp = add("tokenize", cmd_tokenize, help="emit token views of models")
    sp.add_argument("file")
    sp.add_argument("--out")

    sp = add("render", cmd_render, help="export OBJ mesh and sketch SVGs")
    sp.add_argument("file")
    sp.add_argument("--out", help="OBJ output path")
    sp.add_argument("--svg-dir", help="directory for per-sketch SVGs")
    sp.add_argument("--chord-tol", type=float, default=1e-3)

    sp = add("train", cmd_train, help="train one branch or a selector")
    sp.add_argument("--branch", required=True,
                    choices=("sketch", "extrude", "selector"))
    sp.add_argument("--data", required=True, help="corpus directory")
    sp.add_argument("--out", required=True, help="checkpoint path")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--preset", choices=("toy", "full"), default="toy")
    sp.add_argument("--config", help="config file overriding the preset")
    sp.add_argument("--epochs", type=int)
    sp.add_argument("--lr", type=float)
    sp.add_argument("--batch-size", type=int)
    sp.add_argument("--sketch-ckpt", help="trained sketch branch "
                                          "(selector only)")
    sp.add_argument("--extrude-ckpt", help="trained extrude branch "
                                           "(selector only)")
    sp.add_argument("--condition", default="none",
                    help="comma list of conditioned branches, or 'none'")

    sp = add("bundle", cmd_bundle,
             help="write bundle.json for a directory of trained checkpoints")
    sp.add_argument("--dir", required=True,
                    help="directory holding sketch.skex, extrude.skex and "
                         "selector-*.skex")

    sp = add("sample", cmd_sample, help="draw models from a trained bundle")
    sp.add_argument("--ckpt", required=True, help="bundle directory")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--nucleus-p", type=float, default=0.9)
    sp.add_argument("--out", help="JSONL output path")

    sp = add("interpolate", cmd_interpolate,
             help="decode a latent path between two models")
    sp.add_argument("--ckpt", required=True)
    sp.add_argument("--model-a", required=True)
    sp.add_argument("--model-b", required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")

    sp = add("mix", cmd_mix, help="recombine branch codes of two models")
    sp.add_argument("--ckpt", required=True)
    sp.add_argument("--model-a", required=True)
    sp.add_argument("--model-b", required=True)
    sp.add_argument("--take", required=True,
                    help="e.g. topology=A,geometry=B,extrude=A")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")

    sp = add("eval", cmd_eval, help="score generated models against "
                                    "reference sets")
    sp.add_argument("--gen", required=True)
    sp.add_argument("--ref", required=True)
    sp.add_argument("--train", help="training set for novelty")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--n-points", type=int, default=2000)
    sp.add_argument("--grid", type=int, default=28)
    sp.add_argument("--chord-tol", type=float, default=1e-3)
    sp.add_argument("--validity-percent", type=float, default=100.0)
    sp.add_argument("--out")

    sp = add("serve", cmd_serve, help="run the HTTP API over a bundle")
    sp.add_argument("--ckpt", required=True)
    sp.add_argument("--port", type=int, default=8765)
    sp.add_argument("--host", default="127.0.0.1")

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except BrokenPipeError:
        return 0
    except Exception as exc:  # single-line diagnostic, nonzero exit
        print(f"skexcraft: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
