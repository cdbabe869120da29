"""Per-class pixel metrics over label maps.

Scores are kept as raw tp/fp/fn counts so results from many pairs can be
micro-aggregated (sum the counts, then take ratios) without rounding drift.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class ClassScores:
    """Pixel counts for one class, with IoU and F1 derived on demand."""

    class_name: str
    tp: int
    fp: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn) < 0:
            raise ValidationError(f"counts must be non-negative: {self}")

    @property
    def absent(self) -> bool:
        """True when the class occurs in neither prediction nor truth."""
        return self.tp + self.fp + self.fn == 0

    @property
    def iou(self) -> float:
        denom = self.tp + self.fp + self.fn
        return self.tp / denom if denom else 0.0

    @property
    def f1(self) -> float:
        denom = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / denom if denom else 0.0

    def merged(self, other: "ClassScores") -> "ClassScores":
        if other.class_name != self.class_name:
            raise ValidationError(
                f"cannot merge scores for {self.class_name!r} and {other.class_name!r}"
            )
        return ClassScores(self.class_name, self.tp + other.tp,
                           self.fp + other.fp, self.fn + other.fn)


def evaluate(pred: np.ndarray, gt: np.ndarray, classes: Sequence[str]) -> list[ClassScores]:
    """Count per-class tp/fp/fn between two label maps.

    Class i (0-based in `classes`) occupies label id i + 1; id 0 is
    unchanged ground.
    """
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise ValidationError(f"pred shape {pred.shape} != gt shape {gt.shape}")
    out = []
    for i, name in enumerate(classes):
        label = i + 1
        p = pred == label
        g = gt == label
        tp = int(np.count_nonzero(p & g))
        fp = int(np.count_nonzero(p & ~g))
        fn = int(np.count_nonzero(~p & g))
        out.append(ClassScores(name, tp, fp, fn))
    return out


def aggregate(results: Iterable[Sequence[ClassScores]]) -> list[ClassScores]:
    """Micro-aggregate per-pair score tables: counts sum before any ratio."""
    order: list[str] = []
    total: dict[str, ClassScores] = {}
    for table in results:
        for scores in table:
            if scores.class_name in total:
                total[scores.class_name] = total[scores.class_name].merged(scores)
            else:
                order.append(scores.class_name)
                total[scores.class_name] = scores
    return [total[name] for name in order]


def micro_average(table: Sequence[ClassScores]) -> ClassScores:
    """Collapse every class into one count triple."""
    tp = sum(s.tp for s in table)
    fp = sum(s.fp for s in table)
    fn = sum(s.fn for s in table)
    return ClassScores("all", tp, fp, fn)
