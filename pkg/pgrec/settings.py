"""
Configuration layering: dataclass defaults, then PGREC_* environment
variables (a ``.env`` file is honoured via python-dotenv), then a
``key = value`` config file, then explicit CLI flags.
"""

from __future__ import annotations

import dataclasses
import enum
import os
import typing
from pathlib import Path
from typing import Any, Mapping

from dotenv import dotenv_values, load_dotenv

from .errors import UsageError

ENV_PREFIX = "PGREC_"

# Environment keys that map onto config fields; everything else in the
# environment (PGREC_LOG, PGREC_DATA_DIR, ...) is read where it is used.
ENV_FIELDS = ("seed", "threads")


def load_environment(dotenv_path: str | os.PathLike | None = None) -> None:
    load_dotenv(dotenv_path=dotenv_path, override=False)


def read_config_file(path: str | os.PathLike) -> dict[str, str]:
    """Parse a ``key = value`` file. Keys are lower-cased, dashes become underscores."""
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    values = dotenv_values(path)
    out = {}
    for key, value in values.items():
        if value is None:
            raise UsageError(f"{path}: key {key!r} has no value")
        out[key.strip().lower().replace("-", "_")] = value.strip()
    return out


def environment_layer() -> dict[str, str]:
    layer = {}
    for name in ENV_FIELDS:
        value = os.getenv(ENV_PREFIX + name.upper())
        if value:
            layer[name] = value
    return layer


def check_known_keys(mapping: Mapping[str, Any], *config_classes: type) -> None:
    known = set()
    for cls in config_classes:
        known.update(f.name for f in dataclasses.fields(cls))
    unknown = sorted(set(mapping) - known)
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(unknown)}")


def build_config(cls: type, *layers: Mapping[str, Any]):
    """Instantiate dataclass ``cls`` from layered mappings, later layers winning.

    Keys that are not fields of ``cls`` are ignored here; call
    ``check_known_keys`` first to reject typos across all config classes.
    """
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    values: dict[str, Any] = {}
    for layer in layers:
        for key, raw in layer.items():
            if key in names and raw is not None:
                values[key] = _coerce(key, raw, hints[key])
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid {cls.__name__}: {exc}") from exc


def _coerce(key: str, raw: Any, hint: Any) -> Any:
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    if origin is typing.Union:
        if raw is None or (isinstance(raw, str) and raw.lower() in ("", "none")):
            return None
        inner = [a for a in args if a is not type(None)]
        return _coerce(key, raw, inner[0])
    if origin is tuple:
        items = raw.split(",") if isinstance(raw, str) else list(raw)
        return tuple(_coerce(key, item, args[0]) for item in items if str(item).strip())
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if isinstance(hint, type) and issubclass(hint, enum.Enum):
            return hint(text.lower())
        if hint is bool:
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if hint is int:
            return int(text)
        if hint is float:
            return float(text)
    except ValueError as exc:
        raise UsageError(f"config key {key!r}: cannot parse {raw!r}") from exc
    return text
