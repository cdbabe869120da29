"""Open-vocabulary change detection on co-registered bi-temporal imagery.

Two pipeline frameworks share one component interface: propose-compare-
identify builds class-agnostic masks first and names the changed ones, while
identify-promote-compare detects class instances first and keeps those whose
disappearance or appearance both a geometric and a latent check confirm.
"""

from __future__ import annotations

from .config import load_config, parse_config
from .imc import run_imc, run_pipeline
from .mci import run_mci
from .model import (
    BiTemporalPair,
    ChangeResult,
    ComponentBinding,
    FeatureMap,
    InstanceMask,
    MaskSet,
    PipelineConfig,
    Vocabulary,
    VocabularyClass,
)

__version__ = "0.1.0"

__all__ = [
    "BiTemporalPair",
    "ChangeResult",
    "ComponentBinding",
    "FeatureMap",
    "InstanceMask",
    "MaskSet",
    "PipelineConfig",
    "Vocabulary",
    "VocabularyClass",
    "load_config",
    "parse_config",
    "run_imc",
    "run_mci",
    "run_pipeline",
    "__version__",
]
