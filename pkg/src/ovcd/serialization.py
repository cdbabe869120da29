"""Lossless JSON round-trip for instance sets.

One document per pair: {"pair_id", "source", "instances": [...]}, each
instance carrying its class, scores, temporal tag, bbox, and an exact
run-length encoding of its mask.  Keys are sorted and floats written
verbatim by the json module, so save(load(x)) is byte-stable.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .errors import OvcdError, ValidationError
from .geometry import RleMask, decode_rle, encode_rle
from .model import InstanceMask, MaskSet


def instance_to_record(inst: InstanceMask, pair_id: str) -> dict[str, Any]:
    rle = encode_rle(inst.mask)
    return {
        "pair_id": pair_id,
        "class": inst.class_label,
        "change_score": inst.change_score,
        "quality": inst.quality,
        "temporal": inst.temporal,
        "bbox": list(inst.bbox),
        "rle": {"height": rle.height, "width": rle.width, "runs": list(rle.runs)},
    }


def record_to_instance(record: dict[str, Any]) -> InstanceMask:
    try:
        rle = RleMask(record["rle"]["height"], record["rle"]["width"],
                      tuple(record["rle"]["runs"]))
        mask = decode_rle(rle)
        return InstanceMask(
            mask=mask,
            bbox=tuple(record["bbox"]),
            quality=record["quality"],
            temporal=record["temporal"],
            class_label=record["class"],
            change_score=record["change_score"],
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed instance record: {exc}") from exc


def masks_to_document(masks: MaskSet, pair_id: str) -> dict[str, Any]:
    return {
        "pair_id": pair_id,
        "source": masks.source,
        "instances": [instance_to_record(m, pair_id) for m in masks],
    }


def document_to_masks(doc: dict[str, Any]) -> tuple[str, MaskSet]:
    try:
        instances = tuple(record_to_instance(r) for r in doc["instances"])
        return str(doc["pair_id"]), MaskSet(instances, source=doc["source"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed instance document: {exc}") from exc


def save_instances(path: Path | str, masks: MaskSet, pair_id: str) -> None:
    doc = masks_to_document(masks, pair_id)
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def load_instances(path: Path | str) -> tuple[str, MaskSet]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise OvcdError(f"cannot read instance file {path}: {exc}") from exc
    return document_to_masks(doc)
