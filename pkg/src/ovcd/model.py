"""Core value objects shared by every pipeline stage.

All dataclasses here are frozen and validate themselves on construction, so a
value that exists is a value that is internally consistent.  Arrays stored on
instances are marked read-only; mutate a copy, never the stored array.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Mapping

import numpy as np

from .errors import ShapeMismatchError, ValidationError

VALID_SOURCES = ("proposal", "identified", "changed", "final")
VALID_ROLES = ("proposer", "comparator", "identifier", "promoter")


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    if out is arr:
        out = arr.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class BiTemporalPair:
    """A co-registered pair of images of the same scene at two times.

    Attributes:
        t1: First-epoch image, uint8 of shape (H, W, C) with C in {1, 3}.
        t2: Second-epoch image with the exact same shape and dtype.
        pair_id: Stable identifier used in output filenames and records.
    """

    t1: np.ndarray
    t2: np.ndarray
    pair_id: str = "pair"

    def __post_init__(self) -> None:
        for name, img in (("t1", self.t1), ("t2", self.t2)):
            if not isinstance(img, np.ndarray):
                raise ValidationError(f"{name} must be a numpy array")
            if img.dtype != np.uint8:
                raise ValidationError(f"{name} must be uint8, got {img.dtype}")
            if img.ndim != 3 or img.shape[2] not in (1, 3):
                raise ValidationError(
                    f"{name} must have shape (H, W, C) with C in (1, 3), got {img.shape}"
                )
            if img.shape[0] < 1 or img.shape[1] < 1:
                raise ValidationError(f"{name} must be non-empty, got {img.shape}")
        if self.t1.shape != self.t2.shape:
            raise ShapeMismatchError(
                f"temporal shapes differ: {self.t1.shape} vs {self.t2.shape}"
            )
        if not self.pair_id:
            raise ValidationError("pair_id must be non-empty")
        object.__setattr__(self, "t1", _freeze(self.t1))
        object.__setattr__(self, "t2", _freeze(self.t2))

    @property
    def shape(self) -> tuple[int, int]:
        return self.t1.shape[0], self.t1.shape[1]


def validate_pair(pair: BiTemporalPair) -> BiTemporalPair:
    """Re-run pair validation; returns the pair unchanged if consistent."""
    return BiTemporalPair(pair.t1, pair.t2, pair.pair_id)


def tight_bbox(mask: np.ndarray) -> tuple[int, int, int, int]:
    """Tight bounding box of a boolean mask as (x_min, y_min, x_max, y_max).

    Maxima are exclusive.  Raises ValidationError on an all-false mask.
    """
    ys, xs = np.nonzero(mask)
    if len(ys) == 0:
        raise ValidationError("cannot take the bbox of an empty mask")
    return int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1


@dataclass(frozen=True)
class InstanceMask:
    """One segmented instance: a binary mask plus per-instance metadata.

    The bbox must be the tight box of the mask; construction recomputes and
    checks it.  quality is the proposer's confidence, change_score the signed
    comparator output (present only after comparison).
    """

    mask: np.ndarray
    bbox: tuple[int, int, int, int]
    quality: float
    temporal: int
    class_label: str | None = None
    change_score: float | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.mask, np.ndarray) or self.mask.dtype != np.bool_:
            raise ValidationError("mask must be a boolean numpy array")
        if self.mask.ndim != 2:
            raise ValidationError(f"mask must be 2-D, got shape {self.mask.shape}")
        if tuple(int(v) for v in self.bbox) != tight_bbox(self.mask):
            raise ValidationError(
                f"bbox {self.bbox} is not the tight box {tight_bbox(self.mask)}"
            )
        if not (0.0 <= self.quality <= 1.0):
            raise ValidationError(f"quality must be in [0, 1], got {self.quality}")
        if self.temporal not in (1, 2):
            raise ValidationError(f"temporal must be 1 or 2, got {self.temporal}")
        if self.change_score is not None and not (-1.0 <= self.change_score <= 1.0):
            raise ValidationError(
                f"change_score must be in [-1, 1], got {self.change_score}"
            )
        object.__setattr__(self, "mask", _freeze(self.mask))
        object.__setattr__(self, "bbox", tuple(int(v) for v in self.bbox))
        object.__setattr__(self, "quality", float(self.quality))

    @classmethod
    def from_mask(
        cls,
        mask: np.ndarray,
        quality: float,
        temporal: int,
        class_label: str | None = None,
        change_score: float | None = None,
    ) -> "InstanceMask":
        """Build an instance, deriving the tight bbox from the mask."""
        mask = np.asarray(mask, dtype=bool)
        return cls(mask, tight_bbox(mask), quality, temporal, class_label, change_score)

    @property
    def area(self) -> int:
        return int(self.mask.sum())


@dataclass(frozen=True)
class MaskSet:
    """An ordered collection of instances from one pipeline stage."""

    masks: tuple[InstanceMask, ...]
    source: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "masks", tuple(self.masks))
        if self.source not in VALID_SOURCES:
            raise ValidationError(
                f"source must be one of {VALID_SOURCES}, got {self.source!r}"
            )
        shapes = {m.mask.shape for m in self.masks}
        if len(shapes) > 1:
            raise ShapeMismatchError(f"masks have differing shapes: {sorted(shapes)}")

    def __len__(self) -> int:
        return len(self.masks)

    def __iter__(self):
        return iter(self.masks)


def ordering_key(mask: InstanceMask, index: int) -> tuple[int, int, int, int, int]:
    """Deterministic sort key: temporal, then bbox y_min, x_min, area, index."""
    x_min, y_min, _, _ = mask.bbox
    return (mask.temporal, y_min, x_min, mask.area, index)


def sort_masks(masks: tuple[InstanceMask, ...] | list[InstanceMask]) -> tuple[InstanceMask, ...]:
    """Sort instances by ordering_key; insertion index breaks remaining ties."""
    indexed = list(enumerate(masks))
    indexed.sort(key=lambda pair: ordering_key(pair[1], pair[0]))
    return tuple(m for _, m in indexed)


@dataclass(frozen=True)
class FeatureMap:
    """A dense feature grid over one image.

    grid has shape (H_f, W_f, D).  stride is the exact cell size in image
    pixels as a pair of Fractions (H / H_f, W / W_f), so the grid tiles the
    image without rounding drift even when sizes do not divide.
    """

    grid: np.ndarray
    stride: tuple[Fraction, Fraction]
    source_temporal: int

    def __post_init__(self) -> None:
        if not isinstance(self.grid, np.ndarray) or self.grid.ndim != 3:
            raise ValidationError("grid must be a 3-D numpy array")
        grid = np.asarray(self.grid, dtype=np.float64)
        if not np.all(np.isfinite(grid)):
            raise ValidationError("grid must contain only finite values")
        sy, sx = self.stride
        if not isinstance(sy, Fraction) or not isinstance(sx, Fraction):
            raise ValidationError("stride must be a pair of Fractions")
        # stride >= 1 keeps the grid no finer than the image it covers.
        if sy < 1 or sx < 1:
            raise ValidationError(f"stride must be >= 1, got {self.stride}")
        if self.source_temporal not in (1, 2):
            raise ValidationError(f"source_temporal must be 1 or 2, got {self.source_temporal}")
        object.__setattr__(self, "grid", _freeze(grid))
        object.__setattr__(self, "stride", (sy, sx))

    @classmethod
    def for_image(
        cls, grid: np.ndarray, image_shape: tuple[int, int], source_temporal: int
    ) -> "FeatureMap":
        """Build a map whose stride is derived from the covered image shape."""
        h, w = image_shape
        hf, wf = grid.shape[0], grid.shape[1]
        return cls(grid, (Fraction(h, hf), Fraction(w, wf)), source_temporal)

    @property
    def image_shape(self) -> tuple[int, int]:
        """The pixel shape of the image this grid covers."""
        sy, sx = self.stride
        h = sy * self.grid.shape[0]
        w = sx * self.grid.shape[1]
        if h.denominator != 1 or w.denominator != 1:
            raise ValidationError(f"stride {self.stride} does not yield integer image size")
        return int(h), int(w)


@dataclass(frozen=True)
class VocabularyClass:
    """A named target class with optional synonym phrasings."""

    name: str
    synonyms: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.name:
            raise ValidationError("class name must be non-empty")
        object.__setattr__(self, "synonyms", tuple(self.synonyms))

    def prompts(self) -> tuple[str, ...]:
        """Name plus synonyms, de-duplicated, first occurrence wins."""
        seen: dict[str, None] = {}
        for text in (self.name, *self.synonyms):
            seen.setdefault(text, None)
        return tuple(seen)


@dataclass(frozen=True)
class Vocabulary:
    """The open-vocabulary query: foreground classes plus background phrasings.

    Templates wrap each prompt; every template must contain exactly one "{}"
    placeholder which is substituted with the class phrase.
    """

    foreground: tuple[VocabularyClass, ...]
    background: tuple[str, ...] = ("background",)
    templates: tuple[str, ...] = ("{}",)

    def __post_init__(self) -> None:
        object.__setattr__(self, "foreground", tuple(self.foreground))
        object.__setattr__(self, "background", tuple(self.background))
        object.__setattr__(self, "templates", tuple(self.templates))
        if not self.foreground:
            raise ValidationError("vocabulary needs at least one foreground class")
        names = [c.name for c in self.foreground]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate class names: {names}")
        if not self.templates:
            raise ValidationError("vocabulary needs at least one template")
        for t in self.templates:
            if t.count("{}") != 1:
                raise ValidationError(f"template {t!r} must contain exactly one {{}}")

    def class_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.foreground)

    def class_index(self) -> dict[str, int]:
        """Map class name to its positive label id; 0 is reserved for no-change."""
        return {c.name: i + 1 for i, c in enumerate(self.foreground)}

    def expand(self, phrase: str) -> tuple[str, ...]:
        """Apply every template to one phrase, de-duplicated."""
        seen: dict[str, None] = {}
        for t in self.templates:
            seen.setdefault(t.replace("{}", phrase), None)
        return tuple(seen)


@dataclass(frozen=True)
class ComponentBinding:
    """Selects a backend for one component role plus backend-specific params."""

    backend: str = "synthetic"
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.backend:
            raise ValidationError("backend name must be non-empty")
        object.__setattr__(self, "params", dict(self.params))


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a pipeline run needs besides the images and vocabulary."""

    framework: str = "mci"
    beta: float = 0.0
    nms_iou: float = 0.5
    iou_sum_threshold: float = 0.5
    tile_size: int | None = None
    components: Mapping[str, ComponentBinding] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.framework not in ("mci", "imc"):
            raise ValidationError(f"framework must be 'mci' or 'imc', got {self.framework!r}")
        if not (-1.0 <= self.beta <= 1.0):
            raise ValidationError(f"beta must be in [-1, 1], got {self.beta}")
        if not (0.0 < self.nms_iou <= 1.0):
            raise ValidationError(f"nms_iou must be in (0, 1], got {self.nms_iou}")
        if self.iou_sum_threshold < 0.0:
            raise ValidationError(
                f"iou_sum_threshold must be >= 0, got {self.iou_sum_threshold}"
            )
        if self.tile_size is not None and self.tile_size < 1:
            raise ValidationError(f"tile_size must be positive, got {self.tile_size}")
        comps = dict(self.components)
        unknown = set(comps) - set(VALID_ROLES)
        if unknown:
            raise ValidationError(f"unknown component roles: {sorted(unknown)}")
        for role, binding in comps.items():
            if not isinstance(binding, ComponentBinding):
                raise ValidationError(f"component {role!r} must be a ComponentBinding")
        object.__setattr__(self, "components", comps)

    def binding(self, role: str) -> ComponentBinding:
        if role not in VALID_ROLES:
            raise ValidationError(f"unknown component role {role!r}")
        return self.components.get(role, ComponentBinding())

    def component_cfg(self, role: str, temporal: int | None = None) -> dict[str, Any]:
        """Flatten a binding into the mapping component entry points accept.

        A params key "per_temporal" may hold {"1": {...}, "2": {...}}
        overrides applied on top of the shared params for that temporal
        (e.g. a different checkpoint or color table per epoch).
        """
        binding = self.binding(role)
        cfg: dict[str, Any] = {"backend": binding.backend, "seed": self.seed}
        params = dict(binding.params)
        overrides = params.pop("per_temporal", {})
        cfg.update(params)
        if temporal is not None:
            cfg["temporal"] = temporal
            for key in (temporal, str(temporal)):
                if key in overrides:
                    cfg.update(overrides[key])
                    break
        return cfg


@dataclass(frozen=True)
class ChangeResult:
    """Final output of a pipeline run on one pair.

    class_map is an (H, W) uint8 label image where 0 means no change and the
    positive ids follow class_index.  Every nonzero pixel must be covered by
    at least one instance of the matching class.
    """

    pair_id: str
    instances: MaskSet
    class_map: np.ndarray
    class_index: Mapping[str, int]

    def __post_init__(self) -> None:
        if self.instances.source != "final":
            raise ValidationError(
                f"result instances must have source 'final', got {self.instances.source!r}"
            )
        cmap = self.class_map
        if not isinstance(cmap, np.ndarray) or cmap.dtype != np.uint8 or cmap.ndim != 2:
            raise ValidationError("class_map must be a 2-D uint8 array")
        index = dict(self.class_index)
        ids = set(index.values())
        if len(ids) != len(index) or any(i < 1 for i in ids):
            raise ValidationError(f"class_index ids must be unique positive ints: {index}")
        present = set(int(v) for v in np.unique(cmap)) - {0}
        if not present <= ids:
            raise ValidationError(f"class_map ids {sorted(present)} outside index {index}")
        for m in self.instances:
            if m.mask.shape != cmap.shape:
                raise ShapeMismatchError(
                    f"instance shape {m.mask.shape} != class_map shape {cmap.shape}"
                )
            if m.class_label is None or m.class_label not in index:
                raise ValidationError(
                    f"final instance must carry a vocabulary class, got {m.class_label!r}"
                )
        covered = np.zeros(cmap.shape, dtype=bool)
        for m in self.instances:
            covered |= m.mask & (cmap == index[m.class_label])
        if not np.all(covered[cmap != 0]):
            raise ValidationError("class_map has labeled pixels no instance accounts for")
        object.__setattr__(self, "class_map", _freeze(cmap))
        object.__setattr__(self, "class_index", index)


def with_score(mask: InstanceMask, score: float) -> InstanceMask:
    """Copy of an instance with a change score attached."""
    return replace(mask, change_score=score)


def with_label(mask: InstanceMask, label: str | None) -> InstanceMask:
    """Copy of an instance with a class label attached."""
    return replace(mask, class_label=label)
