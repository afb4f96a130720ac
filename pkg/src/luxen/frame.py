"""Columnar frame store: data, history, version counters and cache slots.

A Frame owns an ordered list of typed columns plus the bookkeeping that the
rest of the engine relies on: a monotonically increasing version counter, an
operation history propagated to derived frames, the user intent slot, and
three cache slots (metadata, recommendations, row sample) that are validated
against version stamps instead of being eagerly recomputed.
"""

from __future__ import annotations

import hashlib
import io
import re
import threading
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import CsvFormatError, TransformError, UnknownColumnError

STORAGE_TYPES = ("integer", "float", "string", "boolean", "datetime")
SEMANTIC_TYPES = ("nominal", "quantitative", "temporal", "geographic")

FILTER_OPS = ("=", ">", "<", "<=", ">=", "!=")
AGG_FNS = ("mean", "sum", "count", "min", "max", "variance")

# Frames below this row count are "too small" to recommend on directly and
# fall back to history-based recommendations over the parent frame.
SMALL_FRAME_ROWS = 5

_INT_RE = re.compile(r"^[+-]?\d+$")
_FLOAT_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_ISO_RE = re.compile(r"^\d{4}-\d{2}-\d{2}([T ]\d{2}:\d{2}(:\d{2}(\.\d+)?)?)?$")


def parse_iso_datetime(text: str) -> Optional[datetime]:
    """Parse an ISO-8601 date or datetime string, returning None on failure."""
    if not _ISO_RE.match(text):
        return None
    try:
        return datetime.fromisoformat(text.replace(" ", "T"))
    except ValueError:
        return None


@dataclass
class Column:
    """One named, typed column. ``mask`` is True where the cell is null."""

    name: str
    values: np.ndarray
    mask: np.ndarray
    storage_type: str

    def __post_init__(self):
        if self.storage_type not in STORAGE_TYPES:
            raise ValueError(f"unknown storage type {self.storage_type!r}")
        if len(self.values) != len(self.mask):
            raise ValueError("values and mask length mismatch")

    def __len__(self) -> int:
        return len(self.values)

    def non_null(self) -> np.ndarray:
        return self.values[~self.mask]

    def cell(self, i: int):
        """Cell value as a plain Python object, None when null."""
        if self.mask[i]:
            return None
        v = self.values[i]
        if self.storage_type == "datetime":
            return str(np.datetime_as_string(v, unit="s"))
        if isinstance(v, np.generic):
            return v.item()
        return v


@dataclass
class HistoryEvent:
    """One recorded frame operation."""

    kind: str
    params: dict
    seq: int

    KINDS = (
        "load",
        "filter",
        "project",
        "rename",
        "set-column",
        "group-aggregate",
        "pivot",
        "inplace-modify",
        "head-tail",
    )


class Frame:
    """Versioned, ordered columnar table with history and cache slots.

    Mutating transforms never edit a frame in place; they derive a child
    frame with ``version = parent.version + 1`` and cold caches. In-place
    changes coming from outside (the embedding host mutating data under us)
    are signalled through :func:`expire_on_mutation`, which bumps the version
    so every stamped cache turns stale in O(1).
    """

    def __init__(
        self,
        columns: list[Column],
        row_labels: Optional[np.ndarray] = None,
        version: int = 1,
        pre_aggregated: bool = False,
        history: Optional[list[HistoryEvent]] = None,
        parent: Optional["Frame"] = None,
        intent=None,
        intent_version: int = 0,
        type_overrides: Optional[dict[str, str]] = None,
        name: str = "frame",
    ):
        names = [c.name for c in columns]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names")
        self.columns = columns
        n = len(columns[0]) if columns else 0
        for c in columns:
            if len(c) != n:
                raise ValueError(f"column {c.name!r} length mismatch")
        if row_labels is None:
            row_labels = np.arange(n, dtype=object)
        self.row_labels = row_labels
        self.version = version
        self.pre_aggregated = pre_aggregated
        self.history: list[HistoryEvent] = history if history is not None else []
        self.parent = parent
        self.intent = intent
        self.intent_version = intent_version
        self.type_overrides: dict[str, str] = dict(type_overrides or {})
        self.name = name

        # cache slots: (payload, version stamp[, intent-version stamp])
        self.metadata_cache: Optional[tuple[dict, int]] = None
        self.rec_cache: Optional[tuple[Any, int, int]] = None
        self.sample_cache = None

        self.metadata_computes = 0
        self.rec_computes = 0
        self._lock = threading.Lock()

    # -- basic shape ---------------------------------------------------------

    @property
    def row_count(self) -> int:
        return len(self.columns[0]) if self.columns else 0

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise UnknownColumnError(f"unknown column {name!r}")

    def has_column(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    # -- cache stamps --------------------------------------------------------

    def metadata_cache_valid(self) -> bool:
        return self.metadata_cache is not None and self.metadata_cache[1] == self.version

    def rec_cache_valid(self) -> bool:
        return (
            self.rec_cache is not None
            and self.rec_cache[1] == self.version
            and self.rec_cache[2] == self.intent_version
        )

    def sample_cache_valid(self) -> bool:
        return self.sample_cache is not None and self.sample_cache.version == self.version

    def set_intent(self, intent) -> None:
        """Attach (or clear) the analysis intent; expires recommendations only."""
        self.intent = intent
        self.intent_version += 1

    def expire_rec_cache(self) -> None:
        self.rec_cache = None

    def content_fingerprint(self) -> str:
        """Stable hash of data, labels and version (caches excluded)."""
        h = hashlib.sha256()
        h.update(str(self.version).encode())
        for label in self.row_labels:
            h.update(repr(label).encode())
        for c in self.columns:
            h.update(c.name.encode())
            h.update(c.storage_type.encode())
            h.update(c.mask.tobytes())
            if c.values.dtype == object:
                for v in c.values:
                    h.update(repr(v).encode())
            else:
                h.update(c.values.tobytes())
        return h.hexdigest()

    def __repr__(self):
        return (
            f"<Frame {self.name!r} {self.row_count}x{len(self.columns)} "
            f"v{self.version}>"
        )


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------


@dataclass
class LoadOptions:
    delimiter: str = ","
    header: bool = True


def _build_column(name: str, cells: list[str]) -> Column:
    """Infer a storage type for raw text cells and materialize the column.

    Inference order: integer, float, datetime (ISO-8601), boolean, string.
    Empty cells become nulls and do not participate in inference; a fully
    empty column defaults to string.
    """
    mask = np.array([c == "" for c in cells], dtype=bool)
    present = [c for c in cells if c != ""]

    def build(storage: str, converted: Iterable, dtype) -> Column:
        out = np.empty(len(cells), dtype=dtype)
        it = iter(converted)
        for i, missing in enumerate(mask):
            out[i] = _NULL_FILL[storage] if missing else next(it)
        return Column(name, out, mask, storage)

    if present and all(_INT_RE.match(c) for c in present):
        return build("integer", (int(c) for c in present), np.int64)
    if present and all(_FLOAT_RE.match(c) for c in present):
        return build("float", (float(c) for c in present), np.float64)
    if present and all(parse_iso_datetime(c) is not None for c in present):
        converted = (np.datetime64(c.replace(" ", "T"), "s") for c in present)
        return build("datetime", converted, "datetime64[s]")
    if present and all(c.lower() in ("true", "false") for c in present):
        return build("boolean", (c.lower() == "true" for c in present), bool)
    return build("string", iter(present), object)


_NULL_FILL = {
    "integer": 0,
    "float": np.nan,
    "boolean": False,
    "datetime": np.datetime64("NaT"),
    "string": None,
}


def load_csv(source, options: Optional[LoadOptions] = None, name: str = "frame") -> Frame:
    """Parse RFC-4180-style delimited text into a Frame at version 1.

    ``source`` may be bytes, a text string, or a binary/text stream. Raises
    :class:`CsvFormatError` for duplicate header names or ragged rows.
    """
    import csv

    options = options or LoadOptions()
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw

    reader = csv.reader(io.StringIO(text), delimiter=options.delimiter)
    rows = [r for r in reader if r]  # blank lines are skipped
    if not rows:
        raise CsvFormatError("empty input")

    if options.header:
        header, data = rows[0], rows[1:]
        seen = set()
        for h in header:
            if h in seen:
                raise CsvFormatError(f"duplicate header name {h!r}")
            seen.add(h)
    else:
        width = len(rows[0])
        header = [f"column_{i}" for i in range(width)]
        data = rows

    width = len(header)
    for i, row in enumerate(data):
        if len(row) != width:
            raise CsvFormatError(
                f"ragged row {i + 1}: expected {width} fields, got {len(row)}"
            )

    columns = [
        _build_column(header[j], [row[j] for row in data]) for j in range(width)
    ]
    frame = Frame(columns, version=1, name=name)
    frame.history.append(HistoryEvent("load", {"columns": width, "rows": len(data)}, 0))
    return frame


def _column_from_values(name: str, values: Sequence) -> Column:
    """Build a column from typed Python values, inferring storage by type.

    Booleans, ints and floats avoid the text round-trip; anything else
    (strings, dates, mixed types) goes through the textual inference path.
    """
    present = [v for v in values if v is not None]
    mask = np.array([v is None for v in values], dtype=bool)

    def typed(storage: str, dtype, fill) -> Column:
        out = np.empty(len(values), dtype=dtype)
        for i, v in enumerate(values):
            out[i] = fill if v is None else v
        return Column(name, out, mask, storage)

    if present and all(isinstance(v, bool) for v in present):
        return typed("boolean", bool, False)
    if present and all(
        isinstance(v, (int, np.integer)) and not isinstance(v, bool) for v in present
    ):
        return typed("integer", np.int64, 0)
    if present and all(
        isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)
        for v in present
    ):
        return typed("float", np.float64, np.nan)
    cells = ["" if v is None else _plain_text(v) for v in values]
    return _build_column(name, cells)


def frame_from_dict(data: Mapping[str, Sequence], name: str = "frame") -> Frame:
    """Build a frame from {column: values}; None cells become nulls."""
    columns = [_column_from_values(str(col), vals) for col, vals in data.items()]
    frame = Frame(columns, version=1, name=name)
    frame.history.append(
        HistoryEvent("load", {"columns": len(columns), "rows": frame.row_count}, 0)
    )
    return frame


def _plain_text(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float) and float(v).is_integer() and abs(v) < 1e15:
        # keep "3.0" distinguishable from "3" so float columns stay float
        return repr(float(v))
    return str(v)


def frame_from_columns(columns: list[Column], name: str = "frame") -> Frame:
    """Fast constructor for columns that are already typed numpy arrays."""
    frame = Frame(columns, version=1, name=name)
    frame.history.append(
        HistoryEvent("load", {"columns": len(columns), "rows": frame.row_count}, 0)
    )
    return frame


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FilterRows:
    column: str
    op: str
    value: Any


@dataclass(frozen=True)
class Project:
    columns: tuple[str, ...]


@dataclass(frozen=True)
class Rename:
    mapping: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class SetColumn:
    name: str
    values: tuple


@dataclass(frozen=True)
class GroupAggregate:
    keys: tuple[str, ...]
    aggregations: tuple[tuple[str, str], ...]  # (column, fn)


@dataclass(frozen=True)
class Pivot:
    index: str
    columns: str
    values: str
    aggregation: Optional[str] = None


@dataclass(frozen=True)
class HeadTail:
    n: int
    tail: bool = False


@dataclass(frozen=True)
class InplaceModify:
    marker: str = "external"


TransformOp = (
    FilterRows
    | Project
    | Rename
    | SetColumn
    | GroupAggregate
    | Pivot
    | HeadTail
    | InplaceModify
)


def coerce_value(value, storage_type: str):
    """Coerce a filter value (usually text) to a column's storage type.

    Returns None when the value cannot represent any cell of that type, in
    which case no row can match.
    """
    if value is None:
        return None
    if storage_type == "integer":
        if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
            return int(value)
        if isinstance(value, float) and value.is_integer():
            return int(value)
        s = str(value).strip()
        return int(s) if _INT_RE.match(s) else None
    if storage_type == "float":
        if isinstance(value, (int, float, np.floating)) and not isinstance(value, bool):
            return float(value)
        s = str(value).strip()
        return float(s) if _FLOAT_RE.match(s) else None
    if storage_type == "boolean":
        if isinstance(value, bool):
            return value
        s = str(value).strip().lower()
        return {"true": True, "false": False}.get(s)
    if storage_type == "datetime":
        if isinstance(value, np.datetime64):
            return value.astype("datetime64[s]")
        s = str(value).strip()
        return (
            np.datetime64(s.replace(" ", "T"), "s")
            if parse_iso_datetime(s) is not None
            else None
        )
    return str(value)


def filter_mask(column: Column, op: str, value) -> np.ndarray:
    """Row mask for ``column op value``; null cells never match."""
    if op not in FILTER_OPS:
        raise TransformError(f"unknown filter op {op!r}")
    coerced = coerce_value(value, column.storage_type)
    if coerced is None:
        return np.zeros(len(column), dtype=bool)
    vals, mask = column.values, column.mask
    if column.storage_type == "string":
        present = ~mask
        out = np.zeros(len(column), dtype=bool)
        sub = vals[present].astype(object)
        cmp = {
            "=": lambda a: np.array([x == coerced for x in a], dtype=bool),
            "!=": lambda a: np.array([x != coerced for x in a], dtype=bool),
            ">": lambda a: np.array([x > coerced for x in a], dtype=bool),
            "<": lambda a: np.array([x < coerced for x in a], dtype=bool),
            ">=": lambda a: np.array([x >= coerced for x in a], dtype=bool),
            "<=": lambda a: np.array([x <= coerced for x in a], dtype=bool),
        }[op](sub)
        out[present] = cmp
        return out
    with np.errstate(invalid="ignore"):
        cmp = {
            "=": vals == coerced,
            "!=": vals != coerced,
            ">": vals > coerced,
            "<": vals < coerced,
            ">=": vals >= coerced,
            "<=": vals <= coerced,
        }[op]
    return cmp & ~mask


def _derive(
    parent: Frame,
    columns: list[Column],
    row_labels: np.ndarray,
    event: HistoryEvent,
    pre_aggregated: Optional[bool] = None,
) -> Frame:
    child = Frame(
        columns,
        row_labels=row_labels,
        version=parent.version + 1,
        pre_aggregated=parent.pre_aggregated if pre_aggregated is None else pre_aggregated,
        history=list(parent.history) + [event],
        parent=parent,
        intent=parent.intent,
        intent_version=parent.intent_version,
        type_overrides={
            k: v for k, v in parent.type_overrides.items() if any(c.name == k for c in columns)
        },
        name=parent.name,
    )
    return child


def _take(col: Column, idx: np.ndarray) -> Column:
    return Column(col.name, col.values[idx], col.mask[idx], col.storage_type)


def apply_transform(frame: Frame, op: TransformOp) -> Frame:
    """Apply a transform, returning a derived frame with propagated history.

    The child starts with cold caches (every op in the closed set can change
    content or labels), carries the parent's intent, and bumps the version.
    """
    seq = len(frame.history)

    if isinstance(op, FilterRows):
        col = frame.column(op.column)
        idx = np.flatnonzero(filter_mask(col, op.op, op.value))
        cols = [_take(c, idx) for c in frame.columns]
        event = HistoryEvent(
            "filter", {"column": op.column, "op": op.op, "value": op.value}, seq
        )
        return _derive(frame, cols, frame.row_labels[idx], event)

    if isinstance(op, Project):
        missing = [c for c in op.columns if not frame.has_column(c)]
        if missing:
            raise UnknownColumnError(f"unknown column {missing[0]!r}")
        cols = [frame.column(c) for c in op.columns]
        cols = [Column(c.name, c.values, c.mask, c.storage_type) for c in cols]
        event = HistoryEvent("project", {"columns": list(op.columns)}, seq)
        return _derive(frame, cols, frame.row_labels, event)

    if isinstance(op, Rename):
        mapping = dict(op.mapping)
        missing = [c for c in mapping if not frame.has_column(c)]
        if missing:
            raise UnknownColumnError(f"unknown column {missing[0]!r}")
        cols = [
            Column(mapping.get(c.name, c.name), c.values, c.mask, c.storage_type)
            for c in frame.columns
        ]
        event = HistoryEvent("rename", {"mapping": mapping}, seq)
        child = _derive(frame, cols, frame.row_labels, event)
        child.type_overrides = {
            mapping.get(k, k): v
            for k, v in frame.type_overrides.items()
            if mapping.get(k, k) in child.column_names
        }
        return child

    if isinstance(op, SetColumn):
        if len(op.values) != frame.row_count:
            raise TransformError(
                f"set-column length {len(op.values)} != row count {frame.row_count}"
            )
        new_col = _column_from_values(op.name, op.values)
        cols = []
        replaced = False
        for c in frame.columns:
            if c.name == op.name:
                cols.append(new_col)
                replaced = True
            else:
                cols.append(c)
        if not replaced:
            cols.append(new_col)
        event = HistoryEvent("set-column", {"name": op.name}, seq)
        return _derive(frame, cols, frame.row_labels, event)

    if isinstance(op, GroupAggregate):
        return _group_aggregate(frame, op, seq)

    if isinstance(op, Pivot):
        return _pivot(frame, op, seq)

    if isinstance(op, HeadTail):
        n = max(0, int(op.n))
        idx = (
            np.arange(max(0, frame.row_count - n), frame.row_count)
            if op.tail
            else np.arange(min(n, frame.row_count))
        )
        cols = [_take(c, idx) for c in frame.columns]
        event = HistoryEvent("head-tail", {"n": n, "tail": op.tail}, seq)
        return _derive(frame, cols, frame.row_labels[idx], event)

    if isinstance(op, InplaceModify):
        cols = [Column(c.name, c.values, c.mask, c.storage_type) for c in frame.columns]
        event = HistoryEvent("inplace-modify", {"marker": op.marker}, seq)
        return _derive(frame, cols, frame.row_labels, event)

    raise TransformError(f"unknown transform {op!r}")


def _group_key_tuple(frame: Frame, keys: Sequence[str], i: int) -> tuple:
    return tuple(frame.column(k).cell(i) for k in keys)


def _aggregate(values: np.ndarray, fn: str):
    """Aggregate non-null values; returns None for empty input (except count)."""
    if fn == "count":
        return int(len(values))
    if len(values) == 0:
        return None
    if fn == "mean":
        return float(np.mean(values))
    if fn == "sum":
        s = np.sum(values)
        return s.item() if isinstance(s, np.generic) else s
    if fn == "min":
        m = np.min(values)
        return m.item() if isinstance(m, np.generic) else m
    if fn == "max":
        m = np.max(values)
        return m.item() if isinstance(m, np.generic) else m
    if fn == "variance":
        return float(np.var(values)) if len(values) >= 1 else None
    raise TransformError(f"unknown aggregation {fn!r}")


def _group_aggregate(frame: Frame, op: GroupAggregate, seq: int) -> Frame:
    if not op.keys:
        raise TransformError("group-aggregate requires at least one key")
    for k in op.keys:
        frame.column(k)
    for col, fn in op.aggregations:
        frame.column(col)
        if fn not in AGG_FNS:
            raise TransformError(f"unknown aggregation {fn!r}")

    groups: dict[tuple, list[int]] = {}
    for i in range(frame.row_count):
        groups.setdefault(_group_key_tuple(frame, op.keys, i), []).append(i)
    ordered = sorted(groups.keys(), key=lambda t: tuple(_sort_token(v) for v in t))

    out: dict[str, list] = {k: [] for k in op.keys}
    agg_names = []
    used = set(op.keys)
    for col, fn in op.aggregations:
        name = col if col not in used else f"{col}_{fn}"
        while name in used:
            name = f"{name}_{fn}"
        used.add(name)
        agg_names.append(name)
        out[name] = []

    for key in ordered:
        idx = np.array(groups[key], dtype=np.int64)
        for k, v in zip(op.keys, key):
            out[k].append(v)
        for (col, fn), name in zip(op.aggregations, agg_names):
            c = frame.column(col)
            keep = idx[~c.mask[idx]]
            out[name].append(_aggregate(c.values[keep], fn))

    cols = []
    for name, cells in out.items():
        text = ["" if v is None else _plain_text(v) for v in cells]
        cols.append(_build_column(name, text))
    event = HistoryEvent(
        "group-aggregate",
        {"keys": list(op.keys), "aggregations": [list(a) for a in op.aggregations]},
        seq,
    )
    # single-key groups label rows by the key itself (pandas-like index)
    if len(op.keys) == 1:
        labels = np.array([k[0] for k in ordered], dtype=object)
    else:
        labels = np.array([str(tuple(k)) for k in ordered], dtype=object)
    return _derive(frame, cols, labels, event, pre_aggregated=True)


def _sort_token(v):
    # group keys may mix None with values; sort nulls first, then by type class
    if v is None:
        return (0, "", "")
    if isinstance(v, bool):
        return (1, "", str(v))
    if isinstance(v, (int, float)):
        return (2, float(v), "")
    return (3, 0.0, str(v))


def _pivot(frame: Frame, op: Pivot, seq: int) -> Frame:
    for c in (op.index, op.columns, op.values):
        frame.column(c)
    idx_col, col_col, val_col = (
        frame.column(op.index),
        frame.column(op.columns),
        frame.column(op.values),
    )
    buckets: dict[tuple, list[int]] = {}
    for i in range(frame.row_count):
        if idx_col.mask[i] or col_col.mask[i]:
            continue
        buckets.setdefault((idx_col.cell(i), col_col.cell(i)), []).append(i)
    if op.aggregation is None:
        dup = next((k for k, v in buckets.items() if len(v) > 1), None)
        if dup is not None:
            raise TransformError(
                f"pivot produced duplicate (index, column) pair {dup!r}; "
                "an aggregation is required"
            )
    fn = op.aggregation or "sum"
    if fn not in AGG_FNS:
        raise TransformError(f"unknown aggregation {fn!r}")

    row_keys = sorted({k[0] for k in buckets}, key=_sort_token)
    col_keys = sorted({k[1] for k in buckets}, key=_sort_token)

    out_cols: dict[str, list] = {str(ck): [] for ck in col_keys}
    for rk in row_keys:
        for ck in col_keys:
            rows = buckets.get((rk, ck))
            if rows is None:
                out_cols[str(ck)].append(None)
            else:
                ridx = np.array(rows, dtype=np.int64)
                keep = ridx[~val_col.mask[ridx]]
                out_cols[str(ck)].append(_aggregate(val_col.values[keep], fn))

    cols = []
    for name, cells in out_cols.items():
        text = ["" if v is None else _plain_text(v) for v in cells]
        cols.append(_build_column(name, text))
    event = HistoryEvent(
        "pivot",
        {
            "index": op.index,
            "columns": op.columns,
            "values": op.values,
            "aggregation": op.aggregation,
        },
        seq,
    )
    return _derive(
        frame,
        cols,
        np.array(row_keys, dtype=object),
        event,
        pre_aggregated=True,
    )


# ---------------------------------------------------------------------------
# Expiry
# ---------------------------------------------------------------------------

EXPIRY_TRIGGERS = ("inplace-modify", "column-update", "label-change", "intent-change")


def expire_on_mutation(frame: Frame, trigger: str) -> None:
    """O(1) cache expiry by stamp invalidation; computes nothing.

    ``intent-change`` expires only the recommendation cache; the three data
    triggers bump the version so metadata, recommendation and sample caches
    all turn stale at once.
    """
    if trigger not in EXPIRY_TRIGGERS:
        raise ValueError(f"unknown expiry trigger {trigger!r}")
    if trigger == "intent-change":
        frame.intent_version += 1
    else:
        frame.version += 1


def transform_from_dict(desc: Mapping) -> TransformOp:
    """Decode a JSON transform descriptor into a transform op."""
    kind = desc.get("kind")
    try:
        if kind == "filter":
            return FilterRows(desc["column"], desc["op"], desc["value"])
        if kind == "project":
            return Project(tuple(desc["columns"]))
        if kind == "rename":
            return Rename(tuple((str(k), str(v)) for k, v in desc["mapping"].items()))
        if kind == "set-column":
            return SetColumn(desc["name"], tuple(desc["values"]))
        if kind == "group-aggregate":
            return GroupAggregate(
                tuple(desc["keys"]),
                tuple((str(c), str(f)) for c, f in desc["aggregations"]),
            )
        if kind == "pivot":
            return Pivot(
                desc["index"], desc["columns"], desc["values"], desc.get("aggregation")
            )
        if kind == "head-tail":
            return HeadTail(int(desc["n"]), bool(desc.get("tail", False)))
        if kind == "inplace-modify":
            return InplaceModify(str(desc.get("marker", "external")))
    except KeyError as e:
        raise TransformError(f"transform {kind!r} missing field {e.args[0]!r}") from e
    raise TransformError(f"unknown transform kind {kind!r}")
