"""Construction-sequence layer: data model, tokenization, validation."""

from .dedup import dedup, dedup_views
from .grammar import (
    TokenSeq,
    canonicalize,
    dedup_key,
    flatten,
    infer_topology,
    parse,
    split,
    view_key,
)
from .quantize import (
    dequantize_coord,
    dequantize_point,
    dequantize_scale,
    dequantize_signed,
    quantize_coord,
    quantize_point,
    quantize_scale,
    quantize_signed,
)
from .tokens import (
    BOOLEAN_OPS,
    CURVE_KINDS,
    EXT_BLOCK_LEN,
    EXT_BOOL_INTERSECT,
    EXT_BOOL_SUBTRACT,
    EXT_BOOL_UNION,
    EXT_END_EXTRUDE,
    EXT_END_SEQ,
    EXT_ROT_NEG,
    EXT_ROT_POS,
    EXT_ROT_ZERO,
    EXT_VOCAB,
    GEOM_END_CURVE,
    GEOM_END_FACE,
    GEOM_END_LOOP,
    GEOM_END_SEQ,
    GEOM_END_SKETCH,
    GEOM_PIXELS,
    GEOM_VOCAB,
    GRID,
    SubSeq,
    Token,
    TOPO_ARC,
    TOPO_CIRCLE,
    TOPO_END_FACE,
    TOPO_END_LOOP,
    TOPO_END_SEQ,
    TOPO_END_SKETCH,
    TOPO_LINE,
    TOPO_VOCAB,
    format_token_text,
    parse_token_text,
)
from .types import (
    BadCurveArity,
    CountMismatch,
    Curve,
    ExtrudeParams,
    Face,
    GridPoint,
    IDENTITY_ROTATION,
    InvalidModel,
    JSON_VERSION,
    Loop,
    MalformedSequence,
    ModelSE,
    OutOfRange,
    SeqError,
    Sketch,
    curve,
    dumps_model,
    loads_model,
    model_from_json,
    model_to_json,
)
from .validate import Diagnostic, is_valid, validate

__all__ = [
    "BOOLEAN_OPS",
    "BadCurveArity",
    "CountMismatch",
    "CURVE_KINDS",
    "Curve",
    "Diagnostic",
    "EXT_BLOCK_LEN",
    "EXT_BOOL_INTERSECT",
    "EXT_BOOL_SUBTRACT",
    "EXT_BOOL_UNION",
    "EXT_END_EXTRUDE",
    "EXT_END_SEQ",
    "EXT_ROT_NEG",
    "EXT_ROT_POS",
    "EXT_ROT_ZERO",
    "EXT_VOCAB",
    "ExtrudeParams",
    "Face",
    "GEOM_END_CURVE",
    "GEOM_END_FACE",
    "GEOM_END_LOOP",
    "GEOM_END_SEQ",
    "GEOM_END_SKETCH",
    "GEOM_PIXELS",
    "GEOM_VOCAB",
    "GRID",
    "GridPoint",
    "IDENTITY_ROTATION",
    "InvalidModel",
    "JSON_VERSION",
    "Loop",
    "MalformedSequence",
    "ModelSE",
    "OutOfRange",
    "SeqError",
    "Sketch",
    "SubSeq",
    "Token",
    "TokenSeq",
    "TOPO_ARC",
    "TOPO_CIRCLE",
    "TOPO_END_FACE",
    "TOPO_END_LOOP",
    "TOPO_END_SEQ",
    "TOPO_END_SKETCH",
    "TOPO_LINE",
    "TOPO_VOCAB",
    "canonicalize",
    "curve",
    "dedup",
    "dedup_key",
    "dedup_views",
    "dequantize_coord",
    "dequantize_point",
    "dequantize_scale",
    "dequantize_signed",
    "dumps_model",
    "flatten",
    "format_token_text",
    "infer_topology",
    "is_valid",
    "loads_model",
    "model_from_json",
    "model_to_json",
    "parse",
    "parse_token_text",
    "quantize_coord",
    "quantize_point",
    "quantize_scale",
    "quantize_signed",
    "split",
    "validate",
    "view_key",
]
