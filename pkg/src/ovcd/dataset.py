"""Loading image pairs and label maps from disk.

Two on-disk layouts are supported: a directory tree with parallel A/, B/,
and optional label/ folders holding identically named files, and an explicit
JSON manifest listing one record per pair.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import OvcdError, ValidationError
from .model import BiTemporalPair


@dataclass(frozen=True)
class PairPaths:
    """Where one bi-temporal pair (and its optional ground truth) lives."""

    pair_id: str
    t1: Path
    t2: Path
    label: Path | None = None


def load_image(path: Path | str) -> np.ndarray:
    """Read an image as uint8 (H, W, C) with C = 1 for grayscale, else 3."""
    path = Path(path)
    if not path.is_file():
        raise OvcdError(f"image not found: {path}")
    with Image.open(path) as img:
        if img.mode == "L":
            arr = np.asarray(img, dtype=np.uint8)[:, :, None]
        else:
            arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
    return arr


def load_pair(paths: PairPaths) -> BiTemporalPair:
    return BiTemporalPair(load_image(paths.t1), load_image(paths.t2), paths.pair_id)


def save_class_map(path: Path | str, class_map: np.ndarray) -> None:
    """Write a uint8 label map as a single-channel PNG."""
    class_map = np.asarray(class_map)
    if class_map.dtype != np.uint8 or class_map.ndim != 2:
        raise ValidationError("class_map must be a 2-D uint8 array")
    Image.fromarray(class_map, mode="L").save(Path(path), format="PNG")


def load_class_map(path: Path | str) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise OvcdError(f"label map not found: {path}")
    with Image.open(path) as img:
        if img.mode != "L":
            img = img.convert("L")
        return np.asarray(img, dtype=np.uint8)


def discover_pairs(
    root: Path | str, t1_dir: str = "A", t2_dir: str = "B", label_dir: str = "label"
) -> list[PairPaths]:
    """Find pairs under root/A and root/B matched by filename, sorted."""
    root = Path(root)
    d1 = root / t1_dir
    d2 = root / t2_dir
    if not d1.is_dir() or not d2.is_dir():
        raise OvcdError(f"expected {d1} and {d2} to be directories")
    labels = root / label_dir
    out = []
    for p1 in sorted(d1.iterdir()):
        if not p1.is_file():
            continue
        p2 = d2 / p1.name
        if not p2.is_file():
            raise OvcdError(f"no second-temporal file for {p1.name} in {d2}")
        label = labels / p1.name
        out.append(PairPaths(
            pair_id=p1.stem,
            t1=p1,
            t2=p2,
            label=label if label.is_file() else None,
        ))
    if not out:
        raise OvcdError(f"no image pairs found under {root}")
    return out


def read_manifest(path: Path | str) -> list[PairPaths]:
    """Read a JSON manifest: a list of {pair_id, t1, t2, label?} records.

    Relative paths resolve against the manifest's own directory.
    """
    path = Path(path)
    try:
        records = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise OvcdError(f"cannot read manifest {path}: {exc}") from exc
    if not isinstance(records, list) or not records:
        raise OvcdError(f"manifest {path} must be a non-empty JSON list")
    base = path.parent
    out = []
    for i, rec in enumerate(records):
        if not isinstance(rec, dict) or not {"pair_id", "t1", "t2"} <= set(rec):
            raise OvcdError(f"manifest entry {i} needs pair_id, t1, and t2")
        label = rec.get("label")
        out.append(PairPaths(
            pair_id=str(rec["pair_id"]),
            t1=base / rec["t1"],
            t2=base / rec["t2"],
            label=base / label if label else None,
        ))
    return out
