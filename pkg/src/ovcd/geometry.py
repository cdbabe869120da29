"""Mask geometry: run-length coding, IoU, suppression, rasterization.

Boxes are (x_min, y_min, x_max, y_max) with exclusive maxima, so width is
x_max - x_min with no +1 correction.  Run-length codes are row-major with
alternating background/foreground runs, the first run counting background
pixels (zero-length when the mask starts with foreground).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MalformedRleError, UnknownClassError, ValidationError
from .model import InstanceMask, MaskSet, ordering_key, sort_masks


@dataclass(frozen=True)
class RleMask:
    """A run-length encoded binary mask."""

    height: int
    width: int
    runs: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "runs", tuple(int(r) for r in self.runs))
        if self.height < 1 or self.width < 1:
            raise MalformedRleError(f"bad size {self.height}x{self.width}")
        if not self.runs:
            raise MalformedRleError("runs must be non-empty")
        if any(r < 0 for r in self.runs):
            raise MalformedRleError(f"negative run in {self.runs}")
        if any(r == 0 for r in self.runs[1:]):
            raise MalformedRleError("only the first run may be zero")
        if sum(self.runs) != self.height * self.width:
            raise MalformedRleError(
                f"runs sum to {sum(self.runs)}, expected {self.height * self.width}"
            )


def encode_rle(mask: np.ndarray) -> RleMask:
    """Run-length encode a boolean mask (row-major, background first)."""
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValidationError(f"mask must be 2-D, got shape {mask.shape}")
    flat = mask.ravel()
    if flat.size == 0:
        raise ValidationError("cannot encode an empty array")
    change = np.nonzero(flat[1:] != flat[:-1])[0] + 1
    bounds = np.concatenate(([0], change, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return RleMask(mask.shape[0], mask.shape[1], tuple(runs))


def decode_rle(rle: RleMask) -> np.ndarray:
    """Inverse of encode_rle."""
    flat = np.zeros(rle.height * rle.width, dtype=bool)
    pos = 0
    value = False
    for run in rle.runs:
        if value:
            flat[pos:pos + run] = True
        pos += run
        value = not value
    return flat.reshape(rle.height, rle.width)


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union of two boolean masks; 0.0 when both empty."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValidationError(f"mask shapes differ: {a.shape} vs {b.shape}")
    inter = np.count_nonzero(a & b)
    union = np.count_nonzero(a | b)
    if union == 0:
        return 0.0
    return inter / union


def box_iou(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> float:
    """IoU of two (x_min, y_min, x_max, y_max) boxes with exclusive maxima."""
    ix = max(0, min(a[2], b[2]) - max(a[0], b[0]))
    iy = max(0, min(a[3], b[3]) - max(a[1], b[1]))
    inter = ix * iy
    area_a = max(0, a[2] - a[0]) * max(0, a[3] - a[1])
    area_b = max(0, b[2] - b[0]) * max(0, b[3] - b[1])
    union = area_a + area_b - inter
    if union == 0:
        return 0.0
    return inter / union


def nms(masks: MaskSet, iou_threshold: float) -> MaskSet:
    """Greedy non-maximum suppression on instance bounding boxes.

    Candidates are visited by descending quality, ties broken by the package
    ordering key so equal-quality inputs pick the same winner every run.  A
    candidate is kept iff its box IoU with every already-kept box stays below
    the threshold.  Kept instances come back in visit order.
    """
    if not (0.0 < iou_threshold <= 1.0):
        raise ValidationError(f"iou_threshold must be in (0, 1], got {iou_threshold}")
    items = masks.masks
    order = sorted(
        range(len(items)),
        key=lambda i: (-items[i].quality, ordering_key(items[i], i)),
    )
    kept: list[InstanceMask] = []
    for i in order:
        cand = items[i]
        if all(box_iou(cand.bbox, k.bbox) < iou_threshold for k in kept):
            kept.append(cand)
    return MaskSet(tuple(kept), source=masks.source)


def merge_bitemporal(m1: MaskSet, m2: MaskSet, iou_threshold: float) -> MaskSet:
    """Pool proposals from both temporals and dedupe them with one NMS pass.

    Instances keep their temporal tag, so downstream pooling still reads
    features from the image each mask was proposed on.
    """
    combined = MaskSet(tuple(m1.masks) + tuple(m2.masks), source="proposal")
    return nms(combined, iou_threshold)


def rasterize(masks: MaskSet, class_index: dict[str, int], height: int, width: int) -> np.ndarray:
    """Paint labeled instances into a uint8 class map.

    Instances must carry a class label and a change score.  Overlaps resolve
    to the higher-scoring instance; exact ties resolve to the instance that
    comes first in the package ordering.  0 marks unchanged pixels.
    """
    shape = (height, width)
    out = np.zeros(shape, dtype=np.uint8)
    order = sorted(
        range(len(masks.masks)),
        key=lambda i: (-(masks.masks[i].change_score or 0.0),
                       ordering_key(masks.masks[i], i)),
    )
    # Paint lowest priority first so the highest-priority instance wins.
    for i in reversed(order):
        m = masks.masks[i]
        if m.class_label is None:
            raise ValidationError("rasterize needs class labels on every instance")
        if m.change_score is None:
            raise ValidationError("rasterize needs change scores on every instance")
        if m.class_label not in class_index:
            raise UnknownClassError(f"class {m.class_label!r} not in {sorted(class_index)}")
        if m.mask.shape != shape:
            raise ValidationError(f"instance shape {m.mask.shape} != target {shape}")
        out[m.mask] = class_index[m.class_label]
    return out


def masks_to_set(masks: list[InstanceMask], source: str) -> MaskSet:
    """Sort instances deterministically and wrap them in a MaskSet."""
    return MaskSet(sort_masks(masks), source=source)
