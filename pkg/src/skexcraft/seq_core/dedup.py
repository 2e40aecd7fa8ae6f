"""Duplicate removal for models and their projected views.

Keys hash the canonical token text, so two models that differ only by face
order, loop order, loop start or traversal direction collapse to one entry.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .grammar import dedup_key, view_key
from .tokens import SubSeq
from .types import ModelSE


def dedup(models: Iterable[ModelSE]) -> list[ModelSE]:
    """Keep the first occurrence of each distinct model, preserving order."""
    seen: set[str] = set()
    out = []
    for m in models:
        k = dedup_key(m)
        if k not in seen:
            seen.add(k)
            out.append(m)
    return out


def dedup_views(groups: Iterable[Sequence[SubSeq]]) -> list[tuple[SubSeq, ...]]:
    """Deduplicate tuples of views (e.g. (topology, geometry) pairs).

    Each group is keyed by the joined keys of its member views, so the same
    sketch appearing in two different models collapses to one training item.
    """
    seen: set[str] = set()
    out = []
    for g in groups:
        g = tuple(g)
        k = "|".join(view_key(v) for v in g)
        if k not in seen:
            seen.add(k)
            out.append(g)
    return out
