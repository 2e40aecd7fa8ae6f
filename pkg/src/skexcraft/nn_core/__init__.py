"""Numpy-based neural network core: autodiff, transformer blocks, Adam."""

from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .functional import (
    cross_entropy,
    dropout,
    embedding_lookup,
    gelu,
    layer_norm,
    softmax,
    token_accuracy,
)
from .optim import Adam
from .sampling import nucleus_sample
from .tensor import (
    Tensor,
    concat,
    default_dtype,
    grad_enabled,
    no_grad,
    parameter,
    set_default_dtype,
    stack,
)
from .transformer import (
    Block,
    FeedForward,
    LayerNorm,
    Linear,
    MASK_BLOCK,
    Module,
    MultiHeadAttention,
    TransformerStack,
    causal_mask,
    key_padding_mask,
)

__all__ = [
    "Adam",
    "Block",
    "CheckpointError",
    "FeedForward",
    "LayerNorm",
    "Linear",
    "MASK_BLOCK",
    "Module",
    "MultiHeadAttention",
    "Tensor",
    "TransformerStack",
    "causal_mask",
    "concat",
    "cross_entropy",
    "default_dtype",
    "dropout",
    "embedding_lookup",
    "gelu",
    "grad_enabled",
    "key_padding_mask",
    "layer_norm",
    "load_checkpoint",
    "nucleus_sample",
    "no_grad",
    "parameter",
    "save_checkpoint",
    "set_default_dtype",
    "softmax",
    "stack",
    "token_accuracy",
]
