"""Generative model: branch encoders/decoders, codebooks, selectors."""

from .branches import (
    ExtrudeBranch,
    SeqDecoder,
    SeqEncoder,
    SketchBranch,
    extrude_allowed_classes,
    extrude_type_ids,
    sample_sequences,
)
from .codebook import Codebook
from .config import (
    CLASS_LAYOUT_VERSION,
    FULL_MODEL,
    TOY_MODEL,
    TOY_TRAIN,
    ModelConfig,
    TrainConfig,
    load_config,
    save_config,
)
from .generate import (
    GenerationExhausted,
    GenerationResult,
    decode_codes,
    encode_model,
    encode_vectors,
    generate,
    interpolate,
    mix_codes,
    mix_models,
    model_views,
    reconstruct,
)
from .persist import load_branch, load_selector, save_branch, save_selector
from .selector import BRANCH_ORDER, CodeSelector, variant_from_name, variant_name
from .training import (
    DivergedLoss,
    EpochLog,
    pad_sequences,
    train_branch,
    train_selector,
)

__all__ = [
    "BRANCH_ORDER",
    "CLASS_LAYOUT_VERSION",
    "Codebook",
    "CodeSelector",
    "DivergedLoss",
    "EpochLog",
    "ExtrudeBranch",
    "FULL_MODEL",
    "GenerationExhausted",
    "GenerationResult",
    "ModelConfig",
    "SeqDecoder",
    "SeqEncoder",
    "SketchBranch",
    "TOY_MODEL",
    "TOY_TRAIN",
    "TrainConfig",
    "decode_codes",
    "encode_model",
    "encode_vectors",
    "extrude_allowed_classes",
    "extrude_type_ids",
    "generate",
    "interpolate",
    "load_branch",
    "load_config",
    "load_selector",
    "mix_codes",
    "mix_models",
    "model_views",
    "pad_sequences",
    "reconstruct",
    "sample_sequences",
    "save_branch",
    "save_config",
    "save_selector",
    "train_branch",
    "train_selector",
    "variant_from_name",
    "variant_name",
]
