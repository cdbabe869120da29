"""Deterministic synthetic backend used for tests, demos, and CI.

The backend treats color as ground truth: masks come from quantized-color
connected components, dense features from per-window color statistics (or
from color-range class scans for the identifier space), and text embeddings
from hashes of the prompt strings.  Everything is a pure function of the
image bytes, the vocabulary, and the seed, so full pipeline runs are exactly
reproducible.
"""

from __future__ import annotations

import hashlib
from typing import Any, Mapping

import numpy as np
from scipy import ndimage

from ..errors import EmptyPromotionError, ValidationError
from ..model import FeatureMap, InstanceMask, MaskSet, Vocabulary, sort_masks
from ..windows import grid_shape_for, window_mean, window_mean_std
from .base import Backend, IdentifiedTarget, TextEmbedding

DEFAULT_LEVELS = 8
DEFAULT_MIN_AREA = 16
DEFAULT_STRIDE = 8
DEFAULT_STATS_DIM = 8
DEFAULT_TEXT_DIM = 32

_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def hash_unit_vector(text: str, dim: int) -> np.ndarray:
    """A unit vector derived only from the text, stable across processes."""
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
    vec = rng.standard_normal(dim)
    return vec / np.linalg.norm(vec)


def quantize_codes(image: np.ndarray, levels: int) -> np.ndarray:
    """Collapse each pixel to one integer code over a coarse color grid."""
    if levels < 1 or levels > 256:
        raise ValidationError(f"levels must be in [1, 256], got {levels}")
    bins = (image.astype(np.int64) * levels) // 256
    code = np.zeros(image.shape[:2], dtype=np.int64)
    for c in range(image.shape[2]):
        code = code * levels + bins[:, :, c]
    return code


def _color_range_mask(image: np.ndarray, lo, hi) -> np.ndarray:
    lo = np.asarray(lo, dtype=np.int64)
    hi = np.asarray(hi, dtype=np.int64)
    if lo.shape != (image.shape[2],) or hi.shape != (image.shape[2],):
        raise ValidationError(
            f"color range must have {image.shape[2]} channels, got {lo.shape}, {hi.shape}"
        )
    img = image.astype(np.int64)
    return np.all((img >= lo) & (img <= hi), axis=2)


class SyntheticBackend(Backend):
    """Color-driven implementation of every component capability."""

    name = "synthetic"

    def propose_masks(self, image: np.ndarray, cfg: Mapping[str, Any]) -> MaskSet:
        """Class-agnostic proposals: connected components of quantized color.

        Quality is 1 - 2 * (mean per-channel std of values/255) inside the
        component, so perfectly uniform regions score exactly 1.0.
        """
        levels = int(cfg.get("levels", DEFAULT_LEVELS))
        min_area = int(cfg.get("min_area", DEFAULT_MIN_AREA))
        temporal = int(cfg.get("temporal", 1))
        codes = quantize_codes(image, levels)
        values = image.astype(np.float64)
        out: list[InstanceMask] = []
        for code in np.unique(codes):
            labels, count = ndimage.label(codes == code, structure=_FOUR_CONNECTED)
            for lab in range(1, count + 1):
                mask = labels == lab
                if int(mask.sum()) < min_area:
                    continue
                # Integer-valued sums are exact, so uniform regions get a
                # spread of exactly zero and a quality of exactly 1.0.
                spread = float(np.mean(values[mask].std(axis=0))) / 255.0
                quality = float(np.clip(1.0 - 2.0 * spread, 0.0, 1.0))
                out.append(InstanceMask.from_mask(mask, quality, temporal))
        return MaskSet(sort_masks(out), source="proposal")

    def extract_features(self, image: np.ndarray, cfg: Mapping[str, Any]) -> FeatureMap:
        """Dense per-cell features over a uniform fractional grid.

        space="stats" (default): mid-gray-centered channel means plus channel
        stds, pushed through a seeded random projection.  space="semantic":
        each cell gets the hash vector of the class whose color range covers
        a strict majority of it, else the hash vector of "background".
        """
        space = cfg.get("space", "stats")
        stride = int(cfg.get("stride", DEFAULT_STRIDE))
        temporal = int(cfg.get("temporal", 1))
        h, w = image.shape[0], image.shape[1]
        hf, wf = grid_shape_for((h, w), stride)
        if space == "stats":
            grid = self._stats_grid(image, hf, wf, cfg)
        elif space == "semantic":
            grid = self._semantic_grid(image, hf, wf, cfg)
        else:
            raise ValidationError(f"unknown feature space {space!r}")
        return FeatureMap.for_image(grid, (h, w), temporal)

    def _stats_grid(self, image: np.ndarray, hf: int, wf: int, cfg: Mapping[str, Any]) -> np.ndarray:
        dim = int(cfg.get("dim", DEFAULT_STATS_DIM))
        seed = int(cfg.get("seed", 0))
        channels = image.shape[2]
        raw = np.empty((hf, wf, 2 * channels), dtype=np.float64)
        for c in range(channels):
            # Stats run in the integer domain (exact float64 sums) and scale
            # afterwards, so uniform cells agree bit-for-bit.
            mean, std = window_mean_std(image[:, :, c].astype(np.float64), hf, wf)
            # Centering at mid-gray keeps opposing colors on opposing rays,
            # which the sign of the cosine comparator depends on.
            raw[:, :, c] = mean / 255.0 - 0.5
            raw[:, :, channels + c] = std / 255.0
        rng = np.random.default_rng(seed)
        projection = rng.standard_normal((2 * channels, dim))
        return raw @ projection

    def _semantic_grid(self, image: np.ndarray, hf: int, wf: int, cfg: Mapping[str, Any]) -> np.ndarray:
        dim = int(cfg.get("dim", DEFAULT_TEXT_DIM))
        class_colors: Mapping[str, Any] = cfg.get("class_colors", {})
        names = list(class_colors)
        coverage = np.zeros((len(names), hf, wf), dtype=np.float64)
        for i, name in enumerate(names):
            lo, hi = class_colors[name]
            coverage[i] = window_mean(_color_range_mask(image, lo, hi).astype(np.float64), hf, wf)
        grid = np.broadcast_to(hash_unit_vector("background", dim), (hf, wf, dim)).copy()
        if names:
            best = coverage.argmax(axis=0)
            majority = coverage.max(axis=0) > 0.5
            for i, name in enumerate(names):
                grid[majority & (best == i)] = hash_unit_vector(name, dim)
        return grid

    def embed_vocabulary(
        self, vocabulary: Vocabulary, cfg: Mapping[str, Any]
    ) -> tuple[TextEmbedding, ...]:
        """One embedding per foreground class and per background phrase.

        A class embedding is the re-normalized mean over its de-duplicated
        templated prompts, so repeating a synonym cannot move the result.
        """
        dim = int(cfg.get("dim", DEFAULT_TEXT_DIM))
        out: list[TextEmbedding] = []
        for cls in vocabulary.foreground:
            prompts: dict[str, None] = {}
            for phrase in cls.prompts():
                for prompt in vocabulary.expand(phrase):
                    prompts.setdefault(prompt, None)
            vectors = [hash_unit_vector(p, dim) for p in prompts]
            out.append(TextEmbedding(cls.name, np.mean(vectors, axis=0)))
        for phrase in vocabulary.background:
            prompts = {}
            for prompt in vocabulary.expand(phrase):
                prompts.setdefault(prompt, None)
            vectors = [hash_unit_vector(p, dim) for p in prompts]
            out.append(TextEmbedding(phrase, np.mean(vectors, axis=0), is_background=True))
        return tuple(out)

    def identify_targets(
        self, image: np.ndarray, vocabulary: Vocabulary, cfg: Mapping[str, Any]
    ) -> tuple[IdentifiedTarget, ...]:
        """Per-class detections from inclusive color-range scans.

        Emits one target per connected in-range component, in the form named
        by cfg["emit"] ("mask", "box", or "point").  Confidence is the
        component's fill ratio inside its own bounding box.
        """
        class_colors: Mapping[str, Any] = cfg.get("class_colors", {})
        emit = cfg.get("emit", "mask")
        min_area = int(cfg.get("min_area", DEFAULT_MIN_AREA))
        temporal = int(cfg.get("temporal", 1))
        out: list[IdentifiedTarget] = []
        for cls in vocabulary.foreground:
            if cls.name not in class_colors:
                continue
            lo, hi = class_colors[cls.name]
            labels, count = ndimage.label(
                _color_range_mask(image, lo, hi), structure=_FOUR_CONNECTED
            )
            for lab in range(1, count + 1):
                mask = labels == lab
                area = int(mask.sum())
                if area < min_area:
                    continue
                ys, xs = np.nonzero(mask)
                x0, y0 = int(xs.min()), int(ys.min())
                x1, y1 = int(xs.max()) + 1, int(ys.max()) + 1
                confidence = area / ((x1 - x0) * (y1 - y0))
                if emit == "mask":
                    out.append(IdentifiedTarget("mask", cls.name, confidence, temporal,
                                                coarse_mask=mask))
                elif emit == "box":
                    out.append(IdentifiedTarget("box", cls.name, confidence, temporal,
                                                box=(x0, y0, x1, y1)))
                elif emit == "point":
                    cy, cx = float(ys.mean()), float(xs.mean())
                    d2 = (ys - cy) ** 2 + (xs - cx) ** 2
                    i = int(np.argmin(d2))
                    out.append(IdentifiedTarget("point", cls.name, confidence, temporal,
                                                point=(int(xs[i]), int(ys[i]))))
                else:
                    raise ValidationError(f"unknown emit kind {emit!r}")
        return tuple(out)

    def promote_to_masks(
        self, image: np.ndarray, targets, cfg: Mapping[str, Any]
    ) -> MaskSet:
        """Refine coarse targets into fine instances, one per target.

        Masks pass through.  A box keeps the pixels inside it that share the
        box's modal quantized color.  A point grows into the 4-connected
        region of its own quantized color.  Class label and temporal carry
        over; the target's confidence becomes the instance quality.
        """
        temporals = {t.temporal for t in targets}
        if len(temporals) > 1:
            raise ValidationError(f"targets span temporals {sorted(temporals)}")
        out = [
            InstanceMask.from_mask(self._promote_one(image, t, cfg),
                                   t.confidence, t.temporal, class_label=t.class_label)
            for t in targets
        ]
        return MaskSet(tuple(out), source="identified")

    def _promote_one(self, image: np.ndarray, target: IdentifiedTarget,
                     cfg: Mapping[str, Any]) -> np.ndarray:
        levels = int(cfg.get("levels", DEFAULT_LEVELS))
        if target.kind == "mask":
            mask = np.asarray(target.coarse_mask, dtype=bool)
            if mask.shape != image.shape[:2]:
                raise ValidationError(
                    f"coarse mask shape {mask.shape} != image shape {image.shape[:2]}"
                )
            return mask.copy()
        codes = quantize_codes(image, levels)
        if target.kind == "box":
            x0, y0, x1, y1 = target.box
            window = codes[y0:y1, x0:x1]
            if window.size == 0:
                raise EmptyPromotionError(f"box {target.box} selects no pixels")
            flat = window.ravel()
            modal = int(np.bincount(flat - flat.min()).argmax()) + int(flat.min())
            mask = np.zeros(image.shape[:2], dtype=bool)
            mask[y0:y1, x0:x1] = window == modal
        else:
            x, y = target.point
            if not (0 <= y < codes.shape[0] and 0 <= x < codes.shape[1]):
                raise EmptyPromotionError(f"point {target.point} outside image")
            labels, _ = ndimage.label(codes == codes[y, x], structure=_FOUR_CONNECTED)
            mask = labels == labels[y, x]
        if not mask.any():
            raise EmptyPromotionError(f"promotion of {target.kind} target produced no pixels")
        return mask
