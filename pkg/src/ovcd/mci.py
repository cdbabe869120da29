"""Propose-compare-identify pipeline and the comparator primitives it shares.

The flow: propose class-agnostic masks on each temporal, pool the two sets
with one NMS pass, score every merged mask with a latent comparator (negative
cosine between its masked-average-pooled features at the two times), keep
scores above beta, then name each survivor by matching pooled identifier
features against the vocabulary embeddings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import components
from .components.base import TextEmbedding
from .errors import EmptySelectionError, ValidationError, ZeroVectorError
from .geometry import masks_to_set, merge_bitemporal, rasterize
from .model import (
    BiTemporalPair,
    ChangeResult,
    FeatureMap,
    InstanceMask,
    MaskSet,
    PipelineConfig,
    Vocabulary,
    with_label,
    with_score,
)
from .windows import cell_of_point, window_mean


@dataclass(frozen=True)
class ScoredMask:
    """An instance together with its comparator score."""

    instance: InstanceMask
    score: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.score):
            raise ValidationError(f"score must be finite, got {self.score}")
        if self.instance.change_score != self.score:
            raise ValidationError(
                f"score {self.score} disagrees with instance change_score "
                f"{self.instance.change_score}"
            )


def _as_mask_array(m: InstanceMask | np.ndarray) -> np.ndarray:
    if isinstance(m, InstanceMask):
        return m.mask
    return np.asarray(m, dtype=bool)


def masked_average_pool(f: FeatureMap, m: InstanceMask | np.ndarray) -> np.ndarray:
    """Average the feature cells a mask covers.

    A cell counts as covered when at least half its area is inside the mask
    (coverage computed exactly on the fractional grid).  Masks too small to
    claim any cell fall back to the single cell containing their centroid.
    """
    mask = _as_mask_array(m)
    if mask.shape != f.image_shape:
        raise ValidationError(
            f"mask shape {mask.shape} != feature image shape {f.image_shape}"
        )
    if not mask.any():
        raise EmptySelectionError("cannot pool over an empty mask")
    hf, wf = f.grid.shape[0], f.grid.shape[1]
    coverage = window_mean(mask.astype(np.float64), hf, wf)
    selected = coverage >= 0.5
    if not selected.any():
        ys, xs = np.nonzero(mask)
        r, c = cell_of_point(float(ys.mean()) + 0.5, float(xs.mean()) + 0.5,
                             mask.shape, (hf, wf))
        return f.grid[r, c].copy()
    return f.grid[selected].mean(axis=0)


def _negative_cosine(v1: np.ndarray, v2: np.ndarray) -> float:
    n1 = float(np.linalg.norm(v1))
    n2 = float(np.linalg.norm(v2))
    if n1 == 0.0 or n2 == 0.0:
        raise ZeroVectorError("pooled feature vector has zero norm")
    cos = float(np.dot(v1, v2) / (n1 * n2))
    return float(np.clip(-cos, -1.0, 1.0))


def change_score(f1: FeatureMap, f2: FeatureMap, m: InstanceMask | np.ndarray) -> float:
    """Negative cosine of the mask's pooled features at the two times.

    +1 is maximal change, -1 no change; identical features give exactly -1.
    """
    return _negative_cosine(masked_average_pool(f1, m), masked_average_pool(f2, m))


def pixel_cva_score(pair: BiTemporalPair, m: InstanceMask | np.ndarray) -> float:
    """Mean per-pixel spectral change magnitude inside a mask.

    Each pixel contributes the euclidean norm of its channel difference with
    channels scaled to [0, 1], so the score lies in [0, sqrt(C)].
    """
    mask = _as_mask_array(m)
    if mask.shape != pair.shape:
        raise ValidationError(f"mask shape {mask.shape} != pair shape {pair.shape}")
    if not mask.any():
        raise EmptySelectionError("cannot score an empty mask")
    diff = (pair.t1.astype(np.float64) - pair.t2.astype(np.float64)) / 255.0
    magnitude = np.sqrt((diff * diff).sum(axis=2))
    return float(magnitude[mask].mean())


def filter_changes(
    masks: MaskSet, f1: FeatureMap, f2: FeatureMap, beta: float
) -> list[ScoredMask]:
    """Keep masks whose latent change score strictly exceeds beta."""
    kept = []
    for m in masks:
        score = change_score(f1, f2, m)
        if score > beta:
            kept.append(ScoredMask(with_score(m, score), score))
    return kept


def filter_changes_cva(
    masks: MaskSet, pair: BiTemporalPair, beta: float
) -> list[ScoredMask]:
    """CVA variant of filter_changes; stored scores are capped at 1.0."""
    kept = []
    for m in masks:
        score = pixel_cva_score(pair, m)
        if score > beta:
            stored = min(score, 1.0)
            kept.append(ScoredMask(with_score(m, stored), stored))
    return kept


def classify_change(
    f1: FeatureMap,
    f2: FeatureMap,
    m: InstanceMask | np.ndarray,
    embeddings: Sequence[TextEmbedding],
) -> str | None:
    """Name a changed mask, or return None when background wins both times.

    The mask's pooled identifier features at each temporal are matched
    against every embedding by cosine.  If either temporal's best match is a
    foreground class, the instance is labeled with the foreground class of
    the higher-similarity temporal; otherwise it is background.
    """
    if not embeddings:
        raise ValidationError("classify_change needs at least one embedding")
    best: list[tuple[TextEmbedding, float]] = []
    for fmap in (f1, f2):
        pooled = masked_average_pool(fmap, m)
        norm = float(np.linalg.norm(pooled))
        if norm == 0.0:
            raise ZeroVectorError("pooled identifier vector has zero norm")
        sims = np.array([float(np.dot(pooled, e.vector)) / norm for e in embeddings])
        i = int(np.argmax(sims))
        best.append((embeddings[i], float(sims[i])))
    winners = [(e, sim) for e, sim in best if not e.is_background]
    if not winners:
        return None
    return max(winners, key=lambda pair: pair[1])[0].class_name


def finalize_result(
    pair: BiTemporalPair, vocabulary: Vocabulary, instances: list[InstanceMask]
) -> ChangeResult:
    """Sort labeled instances, paint the class map, and wrap the result."""
    final = masks_to_set(instances, "final")
    index = vocabulary.class_index()
    h, w = pair.shape
    class_map = rasterize(final, index, h, w)
    return ChangeResult(pair.pair_id, final, class_map, index)


def run_mci(pair: BiTemporalPair, v: Vocabulary, cfg: PipelineConfig) -> ChangeResult:
    """Run the full propose-compare-identify pipeline on one pair."""
    if cfg.framework != "mci":
        raise ValidationError(f"config framework is {cfg.framework!r}, expected 'mci'")
    images = {1: pair.t1, 2: pair.t2}
    proposals = {
        t: components.propose_masks(img, cfg.component_cfg("proposer", t))
        for t, img in images.items()
    }
    merged = merge_bitemporal(proposals[1], proposals[2], cfg.nms_iou)

    comparator = cfg.binding("comparator")
    if comparator.params.get("method", "latent") == "cva":
        changed = filter_changes_cva(merged, pair, cfg.beta)
    else:
        fm1, fm2 = (
            components.extract_features(images[t], cfg.component_cfg("comparator", t))
            for t in (1, 2)
        )
        changed = filter_changes(merged, fm1, fm2, cfg.beta)

    id_cfgs = {}
    for t in (1, 2):
        id_cfg = cfg.component_cfg("identifier", t)
        id_cfg.setdefault("space", "semantic")
        id_cfgs[t] = id_cfg
    embeddings = components.embed_vocabulary(v, id_cfgs[1])
    sem1, sem2 = (components.extract_features(images[t], id_cfgs[t]) for t in (1, 2))

    labeled = []
    for scored in changed:
        label = classify_change(sem1, sem2, scored.instance, embeddings)
        if label is not None:
            labeled.append(with_label(scored.instance, label))
    return finalize_result(pair, v, labeled)
