"""Shared synthetic fixtures for the test suite.

Scene colors are chosen so that the default stats features of background and
object point in near-opposite directions after mid-gray centering, which the
sign conventions of the latent comparator tests rely on.
"""

from __future__ import annotations

import numpy as np

from ovcd.model import (
    BiTemporalPair,
    ComponentBinding,
    InstanceMask,
    PipelineConfig,
    Vocabulary,
    VocabularyClass,
)

BG = (40, 200, 40)
BUILDING = (220, 40, 220)
BUILDING_RANGE = [[200, 0, 200], [255, 90, 255]]
CLASS_COLORS = {"building": BUILDING_RANGE}

RECT = (24, 24, 40, 40)  # y0, x0, y1, x1 of the planted 16x16 object


def scene(rects=(), color=BUILDING, shape=(64, 64)) -> np.ndarray:
    img = np.zeros((*shape, 3), dtype=np.uint8)
    img[:] = BG
    for y0, x0, y1, x1 in rects:
        img[y0:y1, x0:x1] = color
    return img


def planted_pair(pair_id: str = "planted") -> BiTemporalPair:
    """Empty scene at t1; one building-colored rectangle appears at t2."""
    return BiTemporalPair(scene(), scene([RECT]), pair_id)


def identical_pair(pair_id: str = "identical") -> BiTemporalPair:
    img = scene([RECT])
    return BiTemporalPair(img, img.copy(), pair_id)


def planted_footprint(shape=(64, 64)) -> np.ndarray:
    out = np.zeros(shape, dtype=np.uint8)
    y0, x0, y1, x1 = RECT
    out[y0:y1, x0:x1] = 1
    return out


def building_vocab() -> Vocabulary:
    return Vocabulary((VocabularyClass("building"),))


def make_config(framework: str = "mci", **kwargs) -> PipelineConfig:
    components = kwargs.pop("components", None)
    if components is None:
        components = {"identifier": ComponentBinding(params={"class_colors": CLASS_COLORS})}
    return PipelineConfig(framework=framework, components=components, **kwargs)


def rect_mask(y0: int, x0: int, y1: int, x1: int, shape=(64, 64)) -> np.ndarray:
    out = np.zeros(shape, dtype=bool)
    out[y0:y1, x0:x1] = True
    return out


def rect_instance(y0, x0, y1, x1, quality=1.0, temporal=1, shape=(64, 64),
                  class_label=None, change_score=None) -> InstanceMask:
    return InstanceMask.from_mask(rect_mask(y0, x0, y1, x1, shape), quality, temporal,
                                  class_label, change_score)


def random_instance(rng: np.random.Generator, shape=(32, 32), temporal=None,
                    quality=None, class_label=None, change_score=None) -> InstanceMask:
    """A random non-empty rectangle instance."""
    h, w = shape
    y0 = int(rng.integers(0, h - 1))
    x0 = int(rng.integers(0, w - 1))
    y1 = int(rng.integers(y0 + 1, h + 1))
    x1 = int(rng.integers(x0 + 1, w + 1))
    if temporal is None:
        temporal = int(rng.integers(1, 3))
    if quality is None:
        quality = float(rng.integers(0, 5)) / 4.0  # coarse grid forces ties
    return rect_instance(y0, x0, y1, x1, quality, temporal, shape,
                         class_label, change_score)


def random_blob_mask(rng: np.random.Generator, shape=(32, 32)) -> np.ndarray:
    """A random non-empty free-form mask."""
    mask = rng.random(shape) < rng.uniform(0.1, 0.9)
    if not mask.any():
        mask[int(rng.integers(0, shape[0])), int(rng.integers(0, shape[1]))] = True
    return mask
