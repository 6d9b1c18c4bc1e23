"""
Canonical-JSON checkpoints: format tag, version, id-map hash, model metadata
and every parameter's shape and values. Floats use Python's shortest
round-trip repr, so equal parameters give byte-identical files.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

from ..errors import CheckpointMismatchError
from .params import ParamStore

FORMAT = "pgrec-checkpoint"
VERSION = 1


def save_checkpoint(
    path: str | os.PathLike,
    params: ParamStore,
    meta: Mapping[str, Any],
    id_map_hash: str,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {
        "format": FORMAT,
        "version": VERSION,
        "id_map_hash": id_map_hash,
        "meta": dict(meta),
        "params": {
            name: {"shape": list(value.shape), "values": value.reshape(-1).tolist()}
            for name, value in params.params.items()
        },
    }
    path.write_text(json.dumps(body, sort_keys=True, separators=(",", ":")) + "\n")
    return path


def load_checkpoint(
    path: str | os.PathLike,
    expected_id_map_hash: Optional[str] = None,
    expected_shapes: Optional[Mapping[str, tuple]] = None,
) -> tuple[ParamStore, dict]:
    path = Path(path)
    try:
        body = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointMismatchError(f"{path}: unreadable checkpoint ({exc})") from exc
    if body.get("format") != FORMAT or body.get("version") != VERSION:
        raise CheckpointMismatchError(
            f"{path}: expected {FORMAT} v{VERSION}, got "
            f"{body.get('format')} v{body.get('version')}"
        )
    if expected_id_map_hash is not None and body["id_map_hash"] != expected_id_map_hash:
        raise CheckpointMismatchError(
            f"{path}: checkpoint was trained on different id maps "
            f"({body['id_map_hash'][:12]} != {expected_id_map_hash[:12]})"
        )

    store = ParamStore()
    for name in sorted(body["params"]):
        entry = body["params"][name]
        shape = tuple(entry["shape"])
        values = np.asarray(entry["values"], dtype=np.float64)
        if len(shape) != 2 or values.size != shape[0] * shape[1]:
            raise CheckpointMismatchError(f"{path}: {name} values do not match shape {shape}")
        if expected_shapes is not None and tuple(expected_shapes.get(name, ())) != shape:
            raise CheckpointMismatchError(
                f"{path}: {name} has shape {shape}, expected {expected_shapes.get(name)}"
            )
        store.add(name, values.reshape(shape))
    if expected_shapes is not None and set(expected_shapes) != set(store.params):
        raise CheckpointMismatchError(f"{path}: parameter names differ from the model")
    return store, body["meta"]
