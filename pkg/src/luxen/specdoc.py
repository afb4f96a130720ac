"""Serialize visualizations as declarative chart-spec documents.

The emitted document is a Vega-Lite-compatible subset: one mark, x/y/color
encodings, inline pre-computed data values and a title. Histograms and
heatmaps carry explicit bin boundaries (``<field>_start``/``<field>_end``
with ``bin: "binned"``) so renderers never re-bin; aggregates appear in the
encoding only when re-applying them over the inline singleton groups is a
no-op (mean/sum/min/max). Map visualizations are emitted as bar encodings
over the region field with ``usermeta.kind = "map"`` for geo-aware clients.

See README for the full schema.
"""

from __future__ import annotations

import json

from .compiler import ChannelSpec, CompiledVisSpec

_VEGA_MARK = {
    "scatter": "point",
    "color-scatter": "point",
    "bar": "bar",
    "color-bar": "bar",
    "line": "line",
    "color-line": "line",
    "histogram": "bar",
    "heatmap": "rect",
    "color-heatmap": "rect",
    "map": "bar",
}

# re-aggregation over a single pre-aggregated row returns the same value for
# these functions, so the hint is safe to expose to real Vega-Lite renderers
_IDEMPOTENT_AGGS = {"mean", "sum", "min", "max"}

_VL_TYPE = {
    "quantitative": "quantitative",
    "nominal": "nominal",
    "temporal": "temporal",
    "geographic": "nominal",
}


def _count_field(spec: CompiledVisSpec) -> str:
    return "record_count" if "count" in spec.referenced_attributes() else "count"


def _encode_channel(
    spec: CompiledVisSpec, channel: ChannelSpec, binned: bool
) -> dict:
    if channel.attribute is None:
        return {"field": _count_field(spec), "type": "quantitative"}
    enc = {"field": channel.attribute, "type": _VL_TYPE[channel.semantic_type]}
    if channel.aggregation in _IDEMPOTENT_AGGS:
        enc["aggregate"] = channel.aggregation
    if binned:
        enc["field"] = f"{channel.attribute}_start"
        enc["bin"] = "binned"
    return enc


def _title(vis) -> str:
    spec = vis.spec
    parts = []
    for name, ch in spec.channels():
        if ch.attribute is None:
            continue
        label = ch.attribute
        if ch.aggregation and ch.aggregation not in ("count", "none"):
            label = f"{ch.aggregation} {label}"
        parts.append(label)
    if spec.mark == "histogram":
        head = f"Distribution of {parts[0]}" if parts else "Distribution"
    elif len(parts) >= 2:
        head = f"{parts[1]} by {parts[0]}" if spec.mark in ("bar", "color-bar", "line", "color-line", "map") else " vs ".join(parts[:2])
        if len(parts) > 2:
            head += f" by {parts[2]}"
        elif spec.color is not None and spec.color.attribute is not None and len(parts) == 2 and spec.mark in ("color-bar",):
            pass
    elif parts:
        head = f"Count of {parts[0]}"
    else:
        head = spec.mark
    for f in spec.filters:
        head += f" ({f.attribute}{f.op}{f.value})"
    return head


def to_spec_doc(vis) -> dict:
    """Build the declarative document for a vis that has data attached."""
    spec: CompiledVisSpec = vis.spec
    if vis.data is None:
        raise ValueError("vis has no data; process it before exporting")
    binned = spec.mark in ("histogram", "heatmap", "color-heatmap")
    encoding: dict = {}
    if spec.x is not None:
        encoding["x"] = _encode_channel(spec, spec.x, binned and spec.x.attribute is not None)
        if binned and spec.x.attribute is not None:
            encoding["x2"] = {"field": f"{spec.x.attribute}_end"}
    if spec.y is not None:
        y_binned = binned and spec.y.attribute is not None
        encoding["y"] = _encode_channel(spec, spec.y, y_binned)
        if y_binned:
            encoding["y2"] = {"field": f"{spec.y.attribute}_end"}
    if spec.color is not None:
        encoding["color"] = _encode_channel(spec, spec.color, False)

    values = []
    names = list(vis.data.columns.keys())
    for i in range(vis.data.n_rows):
        values.append({name: vis.data.columns[name][i] for name in names})

    doc = {
        "mark": _VEGA_MARK[spec.mark],
        "encoding": encoding,
        "data": {"values": values},
        "title": _title(vis),
    }
    if spec.mark == "map":
        doc["usermeta"] = {"kind": "map"}
    return doc


def serialize_spec_doc(doc: dict) -> bytes:
    """Deterministic UTF-8 JSON bytes (stable key order, compact separators)."""
    return json.dumps(doc, ensure_ascii=False, separators=(",", ":")).encode("utf-8")
