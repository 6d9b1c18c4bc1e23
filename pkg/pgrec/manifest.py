"""Run manifest written beside every command's outputs."""

from __future__ import annotations

import json
import os
import sys
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Optional, Sequence

MANIFEST_FILE = "manifest.json"
# Fields that legitimately differ between otherwise identical runs.
VOLATILE_FIELDS = ("created_at",)


def code_version() -> str:
    try:
        return metadata.version("pgrec")
    except metadata.PackageNotFoundError:
        from . import __version__

        return __version__


def build_manifest(
    command: str,
    argv: Sequence[str],
    seed: Optional[int],
    dataset_hash: Optional[str] = None,
    extra: Optional[dict[str, Any]] = None,
) -> dict[str, Any]:
    manifest = {
        "command": command,
        "argv": list(argv),
        "seed": seed,
        "dataset_hash": dataset_hash,
        "code_version": code_version(),
        "python": sys.version.split()[0],
        "created_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    manifest.update(extra or {})
    return manifest


def write_manifest(out_dir: str | os.PathLike, manifest: dict[str, Any]) -> Path:
    path = Path(out_dir) / MANIFEST_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return path


def stable_fields(manifest: dict[str, Any]) -> dict[str, Any]:
    return {k: v for k, v in manifest.items() if k not in VOLATILE_FIELDS}
