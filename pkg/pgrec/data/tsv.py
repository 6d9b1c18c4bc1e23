"""TSV reading with line-numbered diagnostics, and deterministic TSV writing."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from ..errors import DataFormatError

LINE = "_line"


def read_tsv(
    path: str | os.PathLike,
    required: Sequence[str],
    optional: Sequence[str] = (),
) -> pd.DataFrame:
    """Read a headered UTF-8 TSV as strings; adds a ``_line`` column (1-based file line)."""
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(path, None, "file not found")
    try:
        df = pd.read_csv(
            path, sep="\t", dtype=str, keep_default_na=False, encoding="utf-8"
        )
    except pd.errors.ParserError as exc:
        raise DataFormatError(path, None, f"malformed row: {exc}") from exc
    except (pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataFormatError(path, 1, str(exc)) from exc

    df.columns = [str(c).strip() for c in df.columns]
    header = list(df.columns)
    allowed = list(required) + list(optional)
    if header[: len(required)] != list(required) or any(
        c not in allowed for c in header
    ):
        raise DataFormatError(
            path, 1, f"expected header {'<TAB>'.join(allowed)}, got {'<TAB>'.join(header)}"
        )
    df[LINE] = np.arange(len(df), dtype=np.int64) + 2
    return df


def parse_numeric(
    df: pd.DataFrame, column: str, path, *, integer: bool = False
) -> np.ndarray:
    raw = df[column].astype(str).str.strip()
    values = pd.to_numeric(raw, errors="coerce").to_numpy(dtype=np.float64)
    bad = ~np.isfinite(values)
    if integer:
        bad |= ~bad & (np.mod(np.nan_to_num(values), 1.0) != 0)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DataFormatError(
            path,
            int(df[LINE].iloc[i]),
            f"column {column}: cannot parse {df[column].iloc[i]!r}",
        )
    return values.astype(np.int64) if integer else values


def write_tsv(df: pd.DataFrame, path: str | os.PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, sep="\t", index=False, lineterminator="\n")
    return path


def write_rows(
    path: str | os.PathLike, columns: Sequence[str], rows: Iterable[Sequence]
) -> Path:
    return write_tsv(pd.DataFrame(list(rows), columns=list(columns)), path)
