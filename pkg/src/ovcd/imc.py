"""Identify-promote-compare pipeline.

The flow: an identifier finds per-class targets on each temporal, a promoter
refines every target into a fine mask, and an instance counts as changed only
when two independent checks agree: geometrically it has no same-class
counterpart at the other time (the sum of its IoUs with opposite-temporal
same-class masks stays at or below a threshold), and the latent comparator
also scores it above beta.  Instances from the first temporal are
disappearances, those from the second are appearances; both are changes.
"""

from __future__ import annotations

from typing import Iterable

from . import components
from .errors import ValidationError
from .geometry import mask_iou
from .mci import change_score, finalize_result
from .model import (
    BiTemporalPair,
    ChangeResult,
    FeatureMap,
    InstanceMask,
    MaskSet,
    PipelineConfig,
    Vocabulary,
    with_score,
)


def iou_sum_unchanged(
    target: InstanceMask, others: MaskSet | Iterable[InstanceMask], tau: float
) -> bool:
    """True when same-class masks at the other time jointly cover this one.

    The sum of IoUs against every opposite-temporal instance of the same
    class must strictly exceed tau for the target to count as unchanged.
    """
    if target.class_label is None:
        raise ValidationError("iou_sum_unchanged needs a class label on the target")
    total = 0.0
    for other in others:
        if other.class_label == target.class_label:
            total += mask_iou(target.mask, other.mask)
    return total > tau


def latent_confirm(f1: FeatureMap, f2: FeatureMap, m: InstanceMask, beta: float) -> bool:
    """True when the latent comparator also calls the region changed."""
    return change_score(f1, f2, m) > beta


def dual_confirm(geometric_changed: bool, latent_changed: bool) -> bool:
    """A change stands only when both comparison methods agree."""
    return geometric_changed and latent_changed


def run_imc(pair: BiTemporalPair, v: Vocabulary, cfg: PipelineConfig) -> ChangeResult:
    """Run the full identify-promote-compare pipeline on one pair."""
    if cfg.framework != "imc":
        raise ValidationError(f"config framework is {cfg.framework!r}, expected 'imc'")
    images = {1: pair.t1, 2: pair.t2}
    promoted: dict[int, MaskSet] = {}
    for t, img in images.items():
        targets = components.identify_targets(img, v, cfg.component_cfg("identifier", t))
        promoted[t] = components.promote_to_masks(
            img, targets, cfg.component_cfg("promoter", t)
        )

    fm1, fm2 = (
        components.extract_features(images[t], cfg.component_cfg("comparator", t))
        for t in (1, 2)
    )

    survivors = []
    for t in (1, 2):
        opposite = promoted[2 if t == 1 else 1]
        for inst in promoted[t]:
            geometric = not iou_sum_unchanged(inst, opposite, cfg.iou_sum_threshold)
            latent = latent_confirm(fm1, fm2, inst, cfg.beta)
            if dual_confirm(geometric, latent):
                survivors.append(with_score(inst, change_score(fm1, fm2, inst)))
    return finalize_result(pair, v, survivors)


def run_pipeline(pair: BiTemporalPair, v: Vocabulary, cfg: PipelineConfig) -> ChangeResult:
    """Dispatch to the framework named in the config."""
    if cfg.framework == "mci":
        from .mci import run_mci

        return run_mci(pair, v, cfg)
    return run_imc(pair, v, cfg)
