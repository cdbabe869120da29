"""JSON run configuration: one document holding pipeline and vocabulary.

Unknown keys are rejected at every level, so a typo like "nms_iuo" fails the
run immediately instead of silently applying a default.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError, ValidationError
from .model import ComponentBinding, PipelineConfig, Vocabulary, VocabularyClass

_PIPELINE_KEYS = {
    "framework", "beta", "nms_iou", "iou_sum_threshold", "tile_size", "seed", "components",
}
_BINDING_KEYS = {"backend", "params"}
_VOCAB_KEYS = {"classes", "background", "templates"}
_CLASS_KEYS = {"name", "synonyms"}


def _require_mapping(value: Any, where: str) -> Mapping[str, Any]:
    if not isinstance(value, dict):
        raise ConfigError(f"{where} must be a JSON object, got {type(value).__name__}")
    return value


def _reject_unknown(doc: Mapping[str, Any], allowed: set[str], where: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _parse_binding(doc: Any, where: str) -> ComponentBinding:
    doc = _require_mapping(doc, where)
    _reject_unknown(doc, _BINDING_KEYS, where)
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError(f"{where}.params must be a JSON object")
    return ComponentBinding(backend=doc.get("backend", "synthetic"), params=params)


def parse_pipeline(doc: Any) -> PipelineConfig:
    doc = _require_mapping(doc, "pipeline")
    _reject_unknown(doc, _PIPELINE_KEYS, "pipeline")
    components_doc = _require_mapping(doc.get("components", {}), "pipeline.components")
    components = {
        role: _parse_binding(binding, f"pipeline.components.{role}")
        for role, binding in components_doc.items()
    }
    kwargs: dict[str, Any] = {"components": components}
    for key in ("framework", "beta", "nms_iou", "iou_sum_threshold", "tile_size", "seed"):
        if key in doc:
            kwargs[key] = doc[key]
    try:
        return PipelineConfig(**kwargs)
    except (ValidationError, TypeError) as exc:
        raise ConfigError(f"invalid pipeline config: {exc}") from exc


def _parse_class(doc: Any, where: str) -> VocabularyClass:
    if isinstance(doc, str):
        return VocabularyClass(doc)
    doc = _require_mapping(doc, where)
    _reject_unknown(doc, _CLASS_KEYS, where)
    if "name" not in doc:
        raise ConfigError(f"{where} needs a name")
    synonyms = doc.get("synonyms", [])
    if not isinstance(synonyms, list) or not all(isinstance(s, str) for s in synonyms):
        raise ConfigError(f"{where}.synonyms must be a list of strings")
    return VocabularyClass(str(doc["name"]), tuple(synonyms))


def parse_vocabulary(doc: Any) -> Vocabulary:
    doc = _require_mapping(doc, "vocabulary")
    _reject_unknown(doc, _VOCAB_KEYS, "vocabulary")
    classes_doc = doc.get("classes")
    if not isinstance(classes_doc, list) or not classes_doc:
        raise ConfigError("vocabulary.classes must be a non-empty list")
    classes = tuple(
        _parse_class(c, f"vocabulary.classes[{i}]") for i, c in enumerate(classes_doc)
    )
    kwargs: dict[str, Any] = {"foreground": classes}
    for key in ("background", "templates"):
        if key in doc:
            value = doc[key]
            if not isinstance(value, list) or not all(isinstance(s, str) for s in value):
                raise ConfigError(f"vocabulary.{key} must be a list of strings")
            kwargs[key] = tuple(value)
    try:
        return Vocabulary(**kwargs)
    except ValidationError as exc:
        raise ConfigError(f"invalid vocabulary: {exc}") from exc


def parse_config(doc: Any) -> tuple[PipelineConfig, Vocabulary]:
    doc = _require_mapping(doc, "config")
    _reject_unknown(doc, {"pipeline", "vocabulary"}, "config")
    if "vocabulary" not in doc:
        raise ConfigError("config needs a vocabulary section")
    return parse_pipeline(doc.get("pipeline", {})), parse_vocabulary(doc["vocabulary"])


def load_config(path: Path | str) -> tuple[PipelineConfig, Vocabulary]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(doc)
