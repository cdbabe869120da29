"""Pluggable pipeline components.

Pipelines call the five dispatch functions below with a flat cfg mapping
(produced by PipelineConfig.component_cfg) whose "backend" key routes to a
registered backend.  The synthetic backend ships registered; heavyweight
model adapters register lazily so importing this package stays cheap.
"""

from __future__ import annotations

from typing import Any, Mapping, Sequence

import numpy as np

from ..model import FeatureMap, MaskSet, Vocabulary
from .base import Backend, IdentifiedTarget, TextEmbedding
from .registry import available_backends, get_backend, register, register_lazy
from .synthetic import SyntheticBackend

register("synthetic", SyntheticBackend)

__all__ = [
    "Backend",
    "IdentifiedTarget",
    "TextEmbedding",
    "SyntheticBackend",
    "available_backends",
    "get_backend",
    "register",
    "register_lazy",
    "propose_masks",
    "extract_features",
    "embed_vocabulary",
    "identify_targets",
    "promote_to_masks",
]


def _backend(cfg: Mapping[str, Any]) -> Backend:
    return get_backend(cfg.get("backend", "synthetic"))


def propose_masks(image: np.ndarray, cfg: Mapping[str, Any]) -> MaskSet:
    """Class-agnostic instance proposals for one image."""
    return _backend(cfg).propose_masks(image, cfg)


def extract_features(image: np.ndarray, cfg: Mapping[str, Any]) -> FeatureMap:
    """Dense feature grid for one image."""
    return _backend(cfg).extract_features(image, cfg)


def embed_vocabulary(vocabulary: Vocabulary, cfg: Mapping[str, Any]) -> tuple[TextEmbedding, ...]:
    """Embeddings for every vocabulary class and background phrase."""
    return _backend(cfg).embed_vocabulary(vocabulary, cfg)


def identify_targets(
    image: np.ndarray, vocabulary: Vocabulary, cfg: Mapping[str, Any]
) -> tuple[IdentifiedTarget, ...]:
    """Per-class coarse detections for one image."""
    return _backend(cfg).identify_targets(image, vocabulary, cfg)


def promote_to_masks(
    image: np.ndarray, targets: Sequence[IdentifiedTarget], cfg: Mapping[str, Any]
) -> MaskSet:
    """Refine coarse detections into fine instance masks."""
    return _backend(cfg).promote_to_masks(image, targets, cfg)
