"""Shared component types and the backend interface.

A backend packages up to five capabilities: class-agnostic mask proposal,
dense feature extraction, vocabulary embedding, per-class target
identification, and target-to-mask promotion.  Pipelines only ever talk to
backends through the dispatch functions in this package, so any backend that
implements the methods below can slot into either pipeline framework.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np

from ..errors import ValidationError
from ..model import FeatureMap, MaskSet, Vocabulary

TARGET_KINDS = ("box", "point", "mask")


@dataclass(frozen=True)
class IdentifiedTarget:
    """One detection from an identifier: a box, a point, or a coarse mask.

    Exactly one payload field may be set and it must match kind.  Boxes use
    the package (x_min, y_min, x_max, y_max) exclusive-max convention; points
    are (x, y) pixel coordinates.
    """

    kind: str
    class_label: str
    confidence: float
    temporal: int
    box: tuple[int, int, int, int] | None = None
    point: tuple[int, int] | None = None
    coarse_mask: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind not in TARGET_KINDS:
            raise ValidationError(f"kind must be one of {TARGET_KINDS}, got {self.kind!r}")
        if not self.class_label:
            raise ValidationError("class_label must be non-empty")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValidationError(f"confidence must be in [0, 1], got {self.confidence}")
        if self.temporal not in (1, 2):
            raise ValidationError(f"temporal must be 1 or 2, got {self.temporal}")
        payloads = {
            "box": self.box is not None,
            "point": self.point is not None,
            "mask": self.coarse_mask is not None,
        }
        set_kinds = [k for k, present in payloads.items() if present]
        if set_kinds != [self.kind]:
            raise ValidationError(
                f"target of kind {self.kind!r} must set exactly that payload, got {set_kinds}"
            )
        if self.box is not None:
            x0, y0, x1, y1 = self.box
            if not (x0 < x1 and y0 < y1):
                raise ValidationError(f"degenerate box {self.box}")
            object.__setattr__(self, "box", (int(x0), int(y0), int(x1), int(y1)))
        if self.point is not None:
            object.__setattr__(self, "point", (int(self.point[0]), int(self.point[1])))
        if self.coarse_mask is not None:
            mask = np.asarray(self.coarse_mask, dtype=bool)
            if mask.ndim != 2 or not mask.any():
                raise ValidationError("coarse_mask must be a non-empty 2-D mask")
            mask = mask.copy()
            mask.setflags(write=False)
            object.__setattr__(self, "coarse_mask", mask)


@dataclass(frozen=True)
class TextEmbedding:
    """A unit-norm embedding of one vocabulary phrase set."""

    class_name: str
    vector: np.ndarray
    is_background: bool = False

    def __post_init__(self) -> None:
        vec = np.asarray(self.vector, dtype=np.float64)
        if vec.ndim != 1 or vec.size == 0:
            raise ValidationError("vector must be a non-empty 1-D array")
        norm = float(np.linalg.norm(vec))
        if norm == 0.0 or not np.isfinite(norm):
            raise ValidationError("vector must have a finite nonzero norm")
        vec = vec / norm
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)


class Backend:
    """Interface every backend implements; unsupported ops raise."""

    name = "abstract"

    def propose_masks(self, image: np.ndarray, cfg: Mapping[str, Any]) -> MaskSet:
        raise NotImplementedError(f"{self.name} does not propose masks")

    def extract_features(self, image: np.ndarray, cfg: Mapping[str, Any]) -> FeatureMap:
        raise NotImplementedError(f"{self.name} does not extract features")

    def embed_vocabulary(
        self, vocabulary: Vocabulary, cfg: Mapping[str, Any]
    ) -> tuple[TextEmbedding, ...]:
        raise NotImplementedError(f"{self.name} does not embed vocabularies")

    def identify_targets(
        self, image: np.ndarray, vocabulary: Vocabulary, cfg: Mapping[str, Any]
    ) -> tuple[IdentifiedTarget, ...]:
        raise NotImplementedError(f"{self.name} does not identify targets")

    def promote_to_masks(
        self, image: np.ndarray, targets: Sequence[IdentifiedTarget], cfg: Mapping[str, Any]
    ) -> MaskSet:
        raise NotImplementedError(f"{self.name} does not promote targets")
