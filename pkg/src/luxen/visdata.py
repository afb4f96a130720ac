"""Extract plot-ready data behind a compiled visualization.

Each mark maps to a relational recipe: scatter projects columns, bar/line
group and aggregate, histogram bins and counts, heatmap bins in two
dimensions, map groups by region. Filters are applied first, then rows that
are null in any referenced column are dropped.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .compiler import ChannelSpec, CompiledVisSpec, DEFAULT_HISTOGRAM_BINS, DEFAULT_HEATMAP_BINS
from .frame import Column, Frame, filter_mask


@dataclass
class VisData:
    """Small ordered table of plot-ready tuples."""

    columns: dict[str, list]
    row_count_source: int

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    @property
    def is_empty(self) -> bool:
        return self.n_rows == 0

    def field(self, name: str) -> list:
        return self.columns[name]


def bin_edges(lo: float, hi: float, n: int) -> list[float]:
    """n+1 edges over [lo, hi]; interior edge i is lo + (hi-lo)*i/n."""
    return [lo + (hi - lo) * i / n for i in range(n)] + [hi]


def assign_bins(values: np.ndarray, lo: float, hi: float, n: int) -> np.ndarray:
    """Bin index per value: right-open [e_i, e_{i+1}) with the last bin closed.

    A degenerate range (hi <= lo) puts every value in bin 0.
    """
    if hi <= lo:
        return np.zeros(len(values), dtype=np.int64)
    edges = np.array(bin_edges(lo, hi, n))
    idx = np.searchsorted(edges, values, side="right") - 1
    return np.clip(idx, 0, n - 1)


def _plain(column: Column, i: int):
    return column.cell(int(i))


def _plain_array(column: Column, idx: np.ndarray) -> list:
    return [column.cell(int(i)) for i in idx]


def _count_field(spec: CompiledVisSpec) -> str:
    return "record_count" if "count" in spec.referenced_attributes() else "count"


def _sort_token(v):
    if v is None:
        return (0, "", "")
    if isinstance(v, bool):
        return (1, "", str(v))
    if isinstance(v, (int, float)):
        return (2, float(v), "")
    return (3, 0.0, str(v))


def _aggregate_measure(values: np.ndarray, fn: str):
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
        return float(np.var(values))
    raise ValueError(f"unknown aggregation {fn!r}")


def temporal_granularity(dates: np.ndarray) -> str:
    """Coarsest of year/month/day with at least two distinct values."""
    if len(dates) == 0:
        return "day"
    years = np.unique(dates.astype("datetime64[Y]"))
    if len(years) >= 2:
        return "year"
    months = np.unique(dates.astype("datetime64[M]"))
    if len(months) >= 2:
        return "month"
    return "day"


def _truncate_iso_strings(values: np.ndarray) -> np.ndarray:
    """Temporal keys for string-typed columns: lexical ISO prefixes.

    Unparseable cells keep their raw text as their own category so count
    conservation holds.
    """
    texts = values.astype(str)
    years = {t[:4] for t in texts if len(t) >= 10 and t[4:5] == "-"}
    if len(years) >= 2:
        cut = 4
        pad = "-01-01"
    else:
        months = {t[:7] for t in texts if len(t) >= 10 and t[4:5] == "-"}
        cut, pad = (7, "-01") if len(months) >= 2 else (10, "")
    out = np.empty(len(texts), dtype=object)
    for i, t in enumerate(texts):
        out[i] = t[:cut] + pad if len(t) >= 10 and t[4:5] == "-" else t
    return out.astype(str)


def _temporal_key_array(column: Column, idx: np.ndarray) -> np.ndarray:
    """Per-row temporal group keys at the coarsest useful granularity."""
    if column.storage_type == "datetime":
        dates = column.values[idx]
        granularity = temporal_granularity(dates)
        unit = {"year": "Y", "month": "M", "day": "D"}[granularity]
        return dates.astype(f"datetime64[{unit}]").astype("datetime64[D]")
    return _truncate_iso_strings(column.values[idx])


def _filtered_rows(spec: CompiledVisSpec, frame: Frame) -> np.ndarray:
    n = frame.row_count
    mask = np.ones(n, dtype=bool)
    for f in spec.filters:
        mask &= filter_mask(frame.column(f.attribute), f.op, f.value)
    for attr in spec.referenced_attributes():
        mask &= ~frame.column(attr).mask
    return np.flatnonzero(mask)


def _dim_keys(frame: Frame, channel: ChannelSpec, idx: np.ndarray):
    """(sortable key array, plain-value converter) for a grouping dimension."""
    col = frame.column(channel.attribute)
    if channel.semantic_type == "temporal":
        keys = _temporal_key_array(col, idx)
        if keys.dtype.kind == "M":
            return keys, lambda v: str(np.datetime_as_string(v, unit="D"))
        return keys, str
    vals = col.values[idx]
    if vals.dtype == object:
        return vals.astype(str), str
    if col.storage_type == "datetime":
        return vals, lambda v: str(np.datetime_as_string(v, unit="s"))
    return vals, lambda v: v.item() if isinstance(v, np.generic) else v


def process_vis(spec: CompiledVisSpec, frame: Frame) -> VisData:
    """Run the relational recipe for one compiled spec against a frame.

    Returns an empty VisData (not an error) when no rows survive filtering.
    """
    idx = _filtered_rows(spec, frame)
    if spec.mark in ("scatter", "color-scatter"):
        return _scatter(spec, frame, idx)
    if spec.mark in ("bar", "line", "color-bar", "color-line", "map"):
        return _grouped(spec, frame, idx)
    if spec.mark == "histogram":
        return _histogram(spec, frame, idx)
    if spec.mark in ("heatmap", "color-heatmap"):
        return _heatmap(spec, frame, idx)
    raise ValueError(f"unknown mark {spec.mark!r}")


def _scatter(spec: CompiledVisSpec, frame: Frame, idx: np.ndarray) -> VisData:
    cols: dict[str, list] = {}
    for _, ch in spec.channels():
        if ch.attribute is not None:
            cols[ch.attribute] = _plain_array(frame.column(ch.attribute), idx)
    return VisData(cols, int(len(idx)))


def _grouped(spec: CompiledVisSpec, frame: Frame, idx: np.ndarray) -> VisData:
    # the measure is whichever positional channel carries an aggregation
    # (the synthetic count channel always does); the other one is the
    # grouping dimension, so flipped bars work unchanged
    x, y, color = spec.x, spec.y, spec.color
    count_field = _count_field(spec)
    if y is not None and y.aggregation is not None:
        dim, measure_ch = x, y
    else:
        dim, measure_ch = y, x
    measure = measure_ch if measure_ch.attribute is not None else None
    measure_field = measure.attribute if measure is not None else count_field
    agg = measure_ch.aggregation or "count"
    dim_sort, dim_plain = _dim_keys(frame, dim, idx)

    if agg == "none":
        # explicit no-aggregation: raw (dimension, value) tuples
        out = {
            dim.attribute: [dim_plain(v) for v in dim_sort],
            measure_field: _plain_array(frame.column(measure_field), idx),
        }
        if color is not None and color.attribute is not None:
            out[color.attribute] = _plain_array(frame.column(color.attribute), idx)
        return VisData(out, int(len(idx)))

    measure_values = (
        frame.column(measure.attribute).values[idx] if measure is not None else None
    )

    def group_value(positions: np.ndarray):
        if measure_values is None:
            return int(len(positions))
        return _aggregate_measure(measure_values[positions], agg)

    if color is not None and color.attribute is not None:
        color_col = frame.column(color.attribute)
        color_raw = color_col.values[idx]
        color_sort = color_raw.astype(str) if color_raw.dtype == object else color_raw
        order = np.lexsort((color_sort, dim_sort))  # dim major, color minor, stable
        d_sorted, c_sorted = dim_sort[order], color_sort[order]
        change = np.ones(len(order), dtype=bool)
        if len(order) > 1:
            change[1:] = (d_sorted[1:] != d_sorted[:-1]) | (c_sorted[1:] != c_sorted[:-1])
        starts = np.flatnonzero(change)
        sizes = np.diff(np.append(starts, len(order)))
        out = {dim.attribute: [], color.attribute: [], measure_field: []}
        for s, size in zip(starts, sizes):
            positions = order[s : s + size]  # ascending row order within the group
            out[dim.attribute].append(dim_plain(dim_sort[positions[0]]))
            out[color.attribute].append(color_col.cell(int(idx[positions[0]])))
            out[measure_field].append(group_value(positions))
        return VisData(out, int(len(idx)))

    order = np.argsort(dim_sort, kind="stable")
    uniq, starts, sizes = np.unique(dim_sort[order], return_index=True, return_counts=True)
    rows_out = []
    for u, s, size in zip(uniq, starts, sizes):
        positions = order[s : s + size]
        rows_out.append((dim_plain(u), group_value(positions)))

    if spec.sort_descending:
        rows_out.sort(key=lambda r: (-(r[1] if r[1] is not None else 0), _sort_token(r[0])))
    if spec.category_limit is not None:
        rows_out = rows_out[: spec.category_limit]

    return VisData(
        {
            dim.attribute: [r[0] for r in rows_out],
            measure_field: [r[1] for r in rows_out],
        },
        int(len(idx)),
    )


def _histogram(spec: CompiledVisSpec, frame: Frame, idx: np.ndarray) -> VisData:
    # the binned attribute may sit on y when the user flipped the channels
    binned = spec.x if spec.x.attribute is not None else spec.y
    attr = binned.attribute
    nbins = binned.bin_size or DEFAULT_HISTOGRAM_BINS
    count_field = _count_field(spec)
    if len(idx) == 0:
        return VisData(
            {attr: [], f"{attr}_start": [], f"{attr}_end": [], count_field: []}, 0
        )
    values = frame.column(attr).values[idx].astype(np.float64)
    lo, hi = float(values.min()), float(values.max())
    assignment = assign_bins(values, lo, hi, nbins)
    counts = np.bincount(assignment, minlength=nbins)
    edges = bin_edges(lo, hi, nbins) if hi > lo else bin_edges(lo, lo + 1.0, nbins)
    return VisData(
        {
            attr: [(edges[i] + edges[i + 1]) / 2 for i in range(nbins)],
            f"{attr}_start": [edges[i] for i in range(nbins)],
            f"{attr}_end": [edges[i + 1] for i in range(nbins)],
            count_field: [int(c) for c in counts],
        },
        int(len(idx)),
    )


def _mode(values: list) -> object:
    counts = Counter(values)
    top = max(counts.values())
    return sorted([v for v, c in counts.items() if c == top], key=_sort_token)[0]


def _heatmap(spec: CompiledVisSpec, frame: Frame, idx: np.ndarray) -> VisData:
    x, y, color = spec.x, spec.y, spec.color
    count_field = _count_field(spec)
    color_measure = color is not None and color.attribute is not None
    color_field = color.attribute if color_measure else count_field

    fields = [
        x.attribute,
        f"{x.attribute}_start",
        f"{x.attribute}_end",
        y.attribute,
        f"{y.attribute}_start",
        f"{y.attribute}_end",
        count_field,
    ]
    if color_measure:
        fields.append(color_field)
    if len(idx) == 0:
        return VisData({f: [] for f in fields}, 0)

    nx = x.bin_size or DEFAULT_HEATMAP_BINS
    ny = y.bin_size or DEFAULT_HEATMAP_BINS
    xv = frame.column(x.attribute).values[idx].astype(np.float64)
    yv = frame.column(y.attribute).values[idx].astype(np.float64)
    xlo, xhi = float(xv.min()), float(xv.max())
    ylo, yhi = float(yv.min()), float(yv.max())
    xbin = assign_bins(xv, xlo, xhi, nx)
    ybin = assign_bins(yv, ylo, yhi, ny)
    xedges = bin_edges(xlo, xhi, nx) if xhi > xlo else bin_edges(xlo, xlo + 1.0, nx)
    yedges = bin_edges(ylo, yhi, ny) if yhi > ylo else bin_edges(ylo, ylo + 1.0, ny)

    combined = xbin.astype(np.int64) * ny + ybin.astype(np.int64)
    order = np.argsort(combined, kind="stable")
    uniq, starts, counts = np.unique(
        combined[order], return_index=True, return_counts=True
    )

    out: dict[str, list] = {f: [] for f in fields}
    for u, start, count in zip(uniq, starts, counts):
        bx, by = int(u) // ny, int(u) % ny
        members = order[start : start + count]  # ascending row order within the cell
        out[x.attribute].append((xedges[bx] + xedges[bx + 1]) / 2)
        out[f"{x.attribute}_start"].append(xedges[bx])
        out[f"{x.attribute}_end"].append(xedges[bx + 1])
        out[y.attribute].append((yedges[by] + yedges[by + 1]) / 2)
        out[f"{y.attribute}_start"].append(yedges[by])
        out[f"{y.attribute}_end"].append(yedges[by + 1])
        out[count_field].append(int(count))
        if color_measure:
            rows = idx[members]
            col = frame.column(color.attribute)
            if color.semantic_type == "quantitative":
                agg = color.aggregation or "mean"
                out[color_field].append(_aggregate_measure(col.values[rows], agg))
            else:
                out[color_field].append(_mode([col.cell(int(i)) for i in rows]))
    return VisData(out, int(len(idx)))
