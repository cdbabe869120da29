"""Backend registry with lazy imports.

Heavyweight backends register a "module:Class" path and are only imported
when first requested, so listing backends never drags in their dependencies.
Adapters for models that need local weights follow one convention: the
checkpoint path comes from the OVCD_<NAME>_WEIGHTS environment variable and
a missing or unloadable checkpoint raises BackendUnavailableError.
"""

from __future__ import annotations

import importlib

from ..errors import BackendUnavailableError
from .base import Backend

_FACTORIES: dict[str, object] = {}
_INSTANCES: dict[str, Backend] = {}


def register(name: str, factory) -> None:
    """Register a zero-argument backend factory (often the class itself)."""
    _FACTORIES[name] = factory
    _INSTANCES.pop(name, None)


def register_lazy(name: str, path: str) -> None:
    """Register a backend importable as "package.module:ClassName"."""
    _FACTORIES[name] = path
    _INSTANCES.pop(name, None)


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_FACTORIES))


def get_backend(name: str) -> Backend:
    """Instantiate (once) and return the named backend."""
    if name in _INSTANCES:
        return _INSTANCES[name]
    if name not in _FACTORIES:
        raise BackendUnavailableError(
            f"no backend named {name!r}; available: {available_backends()}"
        )
    factory = _FACTORIES[name]
    if isinstance(factory, str):
        module_name, _, attr = factory.partition(":")
        try:
            module = importlib.import_module(module_name)
            factory = getattr(module, attr)
        except Exception as exc:
            raise BackendUnavailableError(f"backend {name!r} failed to import: {exc}") from exc
    try:
        instance = factory()
    except BackendUnavailableError:
        raise
    except Exception as exc:
        raise BackendUnavailableError(f"backend {name!r} failed to start: {exc}") from exc
    _INSTANCES[name] = instance
    return instance
