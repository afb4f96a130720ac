"""Per-column metadata: unique values, cardinality, extremes, semantic types.

Metadata is computed lazily and memoized on the frame, stamped with the
frame version. Semantic types are derived from the storage type plus
cardinality through a deterministic rule ladder; users can override the
inferred type and the override survives recomputation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._geo import GEO_COLUMN_NAMES, PLACE_NAMES_LOWER
from .errors import UnknownColumnError
from .frame import Column, Frame, SEMANTIC_TYPES, parse_iso_datetime

# at most this many distinct values are stored per column; cardinality stays
# exact beyond the cap, but wildcard enumeration over the column is refused
UNIQUE_CAP = 1000

# integer columns at or below this distinct-value count are treated as
# categorical codes rather than measures
NOMINAL_INT_CARDINALITY = 40

# fraction of non-null string cells that must parse as ISO-8601 for the
# column to count as temporal
TEMPORAL_PARSE_FRACTION = 0.95


@dataclass
class ColumnMetadata:
    """Statistics for one column, as used by validation and compilation."""

    name: str
    storage_type: str
    unique_values: list
    cardinality: int
    min: Optional[object]
    max: Optional[object]
    semantic_type: str
    overridden: bool = False
    capped: bool = field(default=False)

    @property
    def all_null(self) -> bool:
        return self.cardinality == 0


def _uniques(column: Column) -> tuple[list, int, Optional[np.ndarray]]:
    """Distinct non-null values (at most UNIQUE_CAP materialized), exact
    cardinality, and per-distinct counts aligned with the stored values."""
    nn = column.non_null()
    if len(nn) == 0:
        return [], 0, None
    if column.storage_type == "string":
        uniq, counts = np.unique(nn.astype(str), return_counts=True)
    else:
        uniq, counts = np.unique(nn, return_counts=True)
    cardinality = len(uniq)
    head = uniq[:UNIQUE_CAP]
    if column.storage_type == "string":
        values = [str(u) for u in head]
    elif column.storage_type == "datetime":
        values = [str(np.datetime_as_string(u, unit="s")) for u in head]
    else:
        values = [u.item() for u in head]
    return values, cardinality, counts[:UNIQUE_CAP]


def _extremes(column: Column):
    if column.storage_type not in ("integer", "float", "datetime"):
        return None, None
    nn = column.non_null()
    if len(nn) == 0:
        return None, None
    lo, hi = nn.min(), nn.max()
    if column.storage_type == "datetime":
        return (
            str(np.datetime_as_string(lo, unit="s")),
            str(np.datetime_as_string(hi, unit="s")),
        )
    return lo.item(), hi.item()


def _iso_cell_fraction(meta: ColumnMetadata, counts: Optional[np.ndarray]) -> float:
    """Fraction of non-null cells parsing as ISO-8601 dates.

    Computed over the distinct values weighted by their frequencies, which
    is exact below the distinct-value cap; capped columns are judged on the
    stored distinct sample.
    """
    if meta.cardinality == 0:
        return 0.0
    if meta.capped or counts is None or len(counts) != len(meta.unique_values):
        hits = sum(
            1 for u in meta.unique_values if parse_iso_datetime(str(u)) is not None
        )
        return hits / max(1, len(meta.unique_values))
    total = int(counts.sum())
    hits = sum(
        int(c)
        for u, c in zip(meta.unique_values, counts)
        if parse_iso_datetime(str(u)) is not None
    )
    return hits / total


def infer_semantic_type(
    column: Column,
    meta: ColumnMetadata,
    row_count: int,
    unique_counts: Optional[np.ndarray] = None,
) -> str:
    """Classify a column as nominal, quantitative, temporal or geographic.

    Ladder, first match wins:
      1. user override
      2. datetime storage, or a string column where >= 95% of non-null cells
         parse as ISO-8601 dates -> temporal
      3. string column named country/state/county/city (case-insensitive) or
         whose unique values are all known place names -> geographic
      4. float -> quantitative
      5. integer -> nominal when cardinality <= 40, else quantitative
      6. string/boolean -> nominal
    """
    if column.storage_type == "datetime":
        return "temporal"
    if column.storage_type == "string":
        if _iso_cell_fraction(meta, unique_counts) >= TEMPORAL_PARSE_FRACTION:
            return "temporal"
        if column.name.lower() in GEO_COLUMN_NAMES:
            return "geographic"
        if meta.cardinality > 0 and not meta.capped:
            if all(str(u).lower() in PLACE_NAMES_LOWER for u in meta.unique_values):
                return "geographic"
        return "nominal"
    if column.storage_type == "float":
        return "quantitative"
    if column.storage_type == "integer":
        return "nominal" if meta.cardinality <= NOMINAL_INT_CARDINALITY else "quantitative"
    return "nominal"  # boolean


def compute_metadata(frame: Frame) -> dict[str, ColumnMetadata]:
    """Compute (or fetch memoized) metadata for every column of the frame.

    The result is stamped with the frame version; repeated calls at the same
    version return the cached set without recomputation. Nulls are excluded
    from uniques, cardinality and extremes; an all-null column gets
    cardinality 0 with undefined extremes.
    """
    if frame.metadata_cache_valid():
        return frame.metadata_cache[0]

    metas: dict[str, ColumnMetadata] = {}
    for column in frame.columns:
        values, cardinality, counts = _uniques(column)
        capped = cardinality > UNIQUE_CAP
        lo, hi = _extremes(column)
        meta = ColumnMetadata(
            name=column.name,
            storage_type=column.storage_type,
            unique_values=values,
            cardinality=cardinality,
            min=lo,
            max=hi,
            semantic_type="nominal",
            capped=capped,
        )
        override = frame.type_overrides.get(column.name)
        if override is not None:
            meta.semantic_type = override
            meta.overridden = True
        else:
            meta.semantic_type = infer_semantic_type(
                column, meta, frame.row_count, counts
            )
        metas[column.name] = meta

    frame.metadata_cache = (metas, frame.version)
    frame.metadata_computes += 1
    return metas


def set_type_override(frame: Frame, column: str, semantic_type: str) -> None:
    """Pin a column's semantic type; expires recommendations unconditionally."""
    if not frame.has_column(column):
        raise UnknownColumnError(f"unknown column {column!r}")
    if semantic_type not in SEMANTIC_TYPES:
        raise ValueError(f"unknown semantic type {semantic_type!r}")
    frame.type_overrides[column] = semantic_type
    if frame.metadata_cache is not None:
        meta = frame.metadata_cache[0].get(column)
        if meta is not None:
            meta.semantic_type = semantic_type
            meta.overridden = True
    frame.expire_rec_cache()


def columns_of_type(metas: dict[str, ColumnMetadata], semantic_type: str) -> list[str]:
    return [name for name, m in metas.items() if m.semantic_type == semantic_type]
