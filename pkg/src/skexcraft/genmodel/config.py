"""Model and training configuration.

Two presets exist: the full-scale configuration and a toy one small enough
to train on a CPU in minutes.  Configs serialize to flat key=value files so
training runs are reproducible from a single text file.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path

# bumped when any token class layout changes; stored in checkpoints so stale
# models are rejected instead of silently misread
CLASS_LAYOUT_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    dim: int = 256
    n_heads: int = 8
    n_blocks: int = 4
    ff_hidden: int = 512
    dropout: float = 0.1
    topo_codebook: int = 500
    geom_codebook: int = 1000
    ext_codebook: int = 1000
    n_topo_codes: int = 4
    n_geom_codes: int = 2
    n_ext_codes: int = 4
    max_sketch_len: int = 200
    max_extrude_len: int = 100

    @property
    def n_sketch_codes(self) -> int:
        return self.n_topo_codes + self.n_geom_codes

    @property
    def selector_vocab(self) -> int:
        return max(self.topo_codebook, self.geom_codebook, self.ext_codebook)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 300
    batch_size: int = 128
    lr: float = 1e-3
    warmup_steps: int = 2000
    skip_quant_epochs: int = 25
    reseed_interval: int = 20  # batches between dead-code checks
    early_stop_acc: float = 1.0
    early_stop_patience: int = 5
    grad_clip: float = 1.0
    seed: int = 0


FULL_MODEL = ModelConfig()

TOY_MODEL = ModelConfig(
    dim=64,
    n_heads=4,
    n_blocks=2,
    ff_hidden=256,
    dropout=0.0,  # memorization preset: regularization only slows it down
    topo_codebook=32,
    geom_codebook=64,
    ext_codebook=64,
    max_sketch_len=144,
    max_extrude_len=48,
)

# quantization must stay bypassed well past Adam warmup so the encoder has
# separated the samples before the codebooks lock on
TOY_TRAIN = TrainConfig(
    epochs=600,
    batch_size=25,
    lr=2e-3,
    warmup_steps=60,
    skip_quant_epochs=45,
    early_stop_patience=5,
)


def _coerce(kind, text: str):
    if kind is bool:
        return text.strip().lower() in ("1", "true", "yes")
    return kind(text.strip())


def save_config(path, model: ModelConfig, train: TrainConfig | None = None) -> None:
    lines = []
    for section, cfg in (("model", model), ("train", train)):
        if cfg is None:
            continue
        for k, v in asdict(cfg).items():
            lines.append(f"{section}.{k} = {v}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_config(path) -> tuple[ModelConfig, TrainConfig]:
    model_kw: dict = {}
    train_kw: dict = {}
    mfields = {f.name for f in fields(ModelConfig)}
    tfields = {f.name for f in fields(TrainConfig)}
    for ln, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {ln}: expected key = value")
        key, _, val = line.partition("=")
        key = key.strip()
        section, _, name = key.partition(".")
        if section == "model" and name in mfields:
            model_kw[name] = _coerce(type(getattr(FULL_MODEL, name)), val)
        elif section == "train" and name in tfields:
            train_kw[name] = _coerce(type(getattr(TrainConfig(), name)), val)
        else:
            raise ValueError(f"line {ln}: unknown config key {key!r}")
    return ModelConfig(**model_kw), TrainConfig(**train_kw)
