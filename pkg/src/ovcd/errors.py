"""Exception hierarchy for the ovcd package.

Every error raised deliberately by this package derives from OvcdError so
callers can catch one type at an API boundary.
"""

from __future__ import annotations


class OvcdError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(OvcdError):
    """A value object was constructed with inconsistent or out-of-range data."""


class ShapeMismatchError(ValidationError):
    """Two arrays that must share a shape do not."""


class ConfigError(OvcdError):
    """A configuration document is malformed or contains unknown keys."""


class BackendUnavailableError(OvcdError):
    """A named component backend is not registered or failed to import."""


class EmptySelectionError(OvcdError):
    """A mask selected zero pixels where at least one is required."""


class ZeroVectorError(OvcdError):
    """A pooled feature vector has zero norm and cannot be normalized."""


class EmptyPromotionError(OvcdError):
    """Promoting an identified target produced an empty mask."""


class MalformedRleError(ValidationError):
    """A run-length encoding does not describe a mask of the stated size."""


class MissingTileError(OvcdError):
    """A stitch was attempted with an incomplete set of tiles."""


class UnknownClassError(OvcdError):
    """An instance carries a class label absent from the vocabulary."""
