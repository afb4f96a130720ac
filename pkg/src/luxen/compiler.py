"""Compile validated intents into complete visualization specifications.

Three stages mirror the processing pipeline:

  expand_intent   unions and wildcards cross-multiply into enumerated
                  partial specs
  lookup_defaults semantic types are attached from metadata and unsupported
                  or ineffective specs are filtered out
  infer_encoding  a deterministic rule table assigns mark, channels,
                  aggregation and binning; explicit user hints win
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Optional

from .errors import ExpansionError, UnknownColumnError
from .intent import ClauseSpec, IntentSpec
from .metadata import ColumnMetadata

MARKS = (
    "scatter",
    "color-scatter",
    "bar",
    "color-bar",
    "line",
    "color-line",
    "histogram",
    "heatmap",
    "color-heatmap",
    "map",
)

DEFAULT_HISTOGRAM_BINS = 10
DEFAULT_HEATMAP_BINS = 40
SCATTER_ROW_LIMIT = 5000  # above this, scatter degrades to a binned heatmap
BAR_CATEGORY_LIMIT = 15
HIGH_CARDINALITY_NOMINAL = 40


@dataclass(frozen=True)
class AxisSpec:
    attribute: str
    channel: Optional[str] = None
    aggregation: Optional[str] = None
    bin_size: Optional[int] = None
    semantic_type: Optional[str] = None


@dataclass(frozen=True)
class FilterSpec:
    attribute: str
    op: str
    value: str


@dataclass(frozen=True)
class PartialVisSpec:
    """Fully enumerated (no unions/wildcards) but not yet encoded."""

    axes: tuple[AxisSpec, ...]
    filters: tuple[FilterSpec, ...]

    @property
    def axis_attributes(self) -> tuple[str, ...]:
        return tuple(a.attribute for a in self.axes)


@dataclass(frozen=True)
class ChannelSpec:
    """One encoding channel; attribute None means the synthetic record count."""

    attribute: Optional[str]
    semantic_type: str
    aggregation: Optional[str] = None
    bin_size: Optional[int] = None


COUNT_CHANNEL = ChannelSpec(attribute=None, semantic_type="quantitative", aggregation="count")


@dataclass(frozen=True)
class CompiledVisSpec:
    mark: str
    x: Optional[ChannelSpec] = None
    y: Optional[ChannelSpec] = None
    color: Optional[ChannelSpec] = None
    filters: tuple[FilterSpec, ...] = ()
    sort_descending: bool = False
    category_limit: Optional[int] = None

    def channels(self) -> list[tuple[str, ChannelSpec]]:
        out = []
        for name in ("x", "y", "color"):
            ch = getattr(self, name)
            if ch is not None:
                out.append((name, ch))
        return out

    def referenced_attributes(self) -> tuple[str, ...]:
        return tuple(ch.attribute for _, ch in self.channels() if ch.attribute is not None)

    def signature(self) -> str:
        """Stable identity for ranking comparisons and recall measurements."""
        axes = ",".join(
            f"{name}:{ch.attribute or '#count'}:{ch.aggregation or ''}"
            for name, ch in self.channels()
        )
        filt = ",".join(f"{f.attribute}{f.op}{f.value}" for f in self.filters)
        return f"{self.mark}|{axes}|{filt}"


@dataclass
class CompileDiagnostic:
    spec: PartialVisSpec
    reason: str


# ---------------------------------------------------------------------------
# Expand
# ---------------------------------------------------------------------------


def _axis_alternatives(
    clause: ClauseSpec, metas: dict[str, ColumnMetadata]
) -> list[AxisSpec]:
    if clause.wildcard:
        names = [
            name
            for name, m in metas.items()
            if clause.constraint is None or m.semantic_type == clause.constraint
        ]
        return [
            AxisSpec(n, clause.channel, clause.aggregation, clause.bin_size)
            for n in names
        ]
    return [
        AxisSpec(a, clause.channel, clause.aggregation, clause.bin_size)
        for a in clause.attributes
    ]


def _filter_alternatives(
    clause: ClauseSpec, metas: dict[str, ColumnMetadata]
) -> list[FilterSpec]:
    attr = clause.attribute
    meta = metas.get(attr)
    if meta is None:
        raise UnknownColumnError(f"unknown column {attr!r} in filter")
    if clause.value_wildcard:
        if meta.capped:
            raise ExpansionError(
                f"cannot enumerate values of {attr!r}: distinct values exceed "
                "the stored cap"
            )
        return [FilterSpec(attr, clause.filter_op, str(v)) for v in meta.unique_values]
    return [FilterSpec(attr, clause.filter_op, str(v)) for v in clause.values]


def expand_intent(
    intent: IntentSpec, metas: dict[str, ColumnMetadata]
) -> list[PartialVisSpec]:
    """Cross-multiply clause alternatives into partial specs.

    Post-processing drops specs where one attribute occupies two axes or
    more than three axes are requested, then removes unordered axis-set
    duplicates keeping the lexicographically first attribute ordering.
    """
    alternatives = []
    for clause in intent.clauses:
        alts = (
            _axis_alternatives(clause, metas)
            if clause.kind == "axis"
            else _filter_alternatives(clause, metas)
        )
        alternatives.append(alts)

    groups: dict[tuple, PartialVisSpec] = {}
    order: list[tuple] = []
    for combo in itertools.product(*alternatives):
        axes = tuple(a for a in combo if isinstance(a, AxisSpec))
        filters = tuple(f for f in combo if isinstance(f, FilterSpec))
        attrs = tuple(a.attribute for a in axes)
        if len(set(attrs)) != len(attrs):
            continue
        if len(axes) > 3:
            continue
        key = (frozenset(axes), filters)
        spec = PartialVisSpec(axes, filters)
        if key not in groups:
            groups[key] = spec
            order.append(key)
        elif spec.axis_attributes < groups[key].axis_attributes:
            groups[key] = spec
    return [groups[k] for k in order]


# ---------------------------------------------------------------------------
# Lookup
# ---------------------------------------------------------------------------


def lookup_defaults(
    partial: PartialVisSpec, metas: dict[str, ColumnMetadata]
) -> tuple[Optional[PartialVisSpec], Optional[str]]:
    """Attach semantic types; return (None, reason) for invalid specs.

    Removed: axes on unknown or all-null columns, temporal attributes forced
    onto the color channel, two high-cardinality nominal axes, conflicting
    explicit channels, and axis type signatures the rule table does not
    cover.
    """
    axes = []
    for axis in partial.axes:
        meta = metas.get(axis.attribute)
        if meta is None:
            return None, f"unknown column {axis.attribute!r}"
        if meta.cardinality == 0:
            return None, f"column {axis.attribute!r} has no non-null values"
        axes.append(replace(axis, semantic_type=meta.semantic_type))

    for f in partial.filters:
        if f.attribute not in metas:
            return None, f"unknown column {f.attribute!r} in filter"

    explicit = [a.channel for a in axes if a.channel is not None]
    if len(explicit) != len(set(explicit)):
        return None, "two axes claim the same channel"
    for a in axes:
        if a.channel == "color" and a.semantic_type == "temporal":
            return None, "temporal attributes are not supported on the color channel"

    nominal = [a for a in axes if a.semantic_type == "nominal"]
    high_card = [
        a
        for a in nominal
        if metas[a.attribute].cardinality > HIGH_CARDINALITY_NOMINAL
    ]
    if len(nominal) >= 2 and len(high_card) >= 2:
        return None, "two high-cardinality nominal axes are not effective"

    signature = tuple(sorted(a.semantic_type for a in axes))
    if signature not in _RULE_TABLE:
        return None, f"unsupported axis type combination {signature}"

    allowed = _ALLOWED_PINS[signature]
    for a in axes:
        if a.channel is not None and a.channel not in allowed:
            return None, (
                f"channel {a.channel!r} is not available for this axis combination"
            )

    return PartialVisSpec(tuple(axes), partial.filters), None


def lookup_all(
    partials: list[PartialVisSpec], metas: dict[str, ColumnMetadata]
) -> tuple[list[PartialVisSpec], list[CompileDiagnostic]]:
    kept, diagnostics = [], []
    for p in partials:
        ok, reason = lookup_defaults(p, metas)
        if ok is None:
            diagnostics.append(CompileDiagnostic(p, reason))
        else:
            kept.append(ok)
    return kept, diagnostics


# ---------------------------------------------------------------------------
# Infer
# ---------------------------------------------------------------------------

_Q, _N, _T, _G = "quantitative", "nominal", "temporal", "geographic"

_RULE_TABLE = {
    (_Q,): "histogram",
    (_N,): "bar",
    (_T,): "line",
    (_G,): "map",
    (_Q, _Q): "scatter",  # heatmap above the row threshold
    (_N, _Q): "bar",
    (_Q, _T): "line",
    (_G, _Q): "map",
    (_N, _N): "color-bar",
    (_N, _Q, _Q): "color-scatter",  # color-heatmap above the row threshold
    (_N, _N, _Q): "color-bar",
    (_Q, _Q, _Q): "color-heatmap",
}

# explicit channel pins each axis combination can honor; a pin outside the
# set would leave a required slot empty, so lookup filters the spec out
_ALLOWED_PINS = {
    (_Q,): {"x", "y"},
    (_N,): {"x", "y"},
    (_T,): {"x", "y"},
    (_G,): set(),
    (_Q, _Q): {"x", "y"},
    (_N, _Q): {"x", "y"},
    (_Q, _T): {"x", "y"},
    (_G, _Q): set(),
    (_N, _N): {"x", "color"},
    (_N, _Q, _Q): {"x", "y", "color"},
    (_N, _N, _Q): {"x", "y", "color"},
    (_Q, _Q, _Q): {"x", "y", "color"},
}


def _channel(axis: AxisSpec, default_agg=None, default_bin=None) -> ChannelSpec:
    return ChannelSpec(
        attribute=axis.attribute,
        semantic_type=axis.semantic_type,
        aggregation=axis.aggregation if axis.aggregation is not None else default_agg,
        bin_size=axis.bin_size if axis.bin_size is not None else default_bin,
    )


def _pick(axes, semantic_type, exclude=()):
    for a in axes:
        if a.semantic_type == semantic_type and a not in exclude:
            return a
    raise AssertionError(f"no {semantic_type} axis present")


def infer_encoding(
    partial: PartialVisSpec,
    metas: dict[str, ColumnMetadata],
    row_count: int,
    histogram_bins: int = DEFAULT_HISTOGRAM_BINS,
    heatmap_bins: int = DEFAULT_HEATMAP_BINS,
) -> CompiledVisSpec:
    """Deterministic mark and channel assignment per the rule table.

    Dimensions land on x and measures on y; among two quantitative axes,
    clause order decides x then y. Explicitly specified channels,
    aggregations and bin sizes always override the defaults.
    """
    axes = list(partial.axes)
    signature = tuple(sorted(a.semantic_type for a in axes))
    mark = _RULE_TABLE[signature]
    filters = partial.filters
    cardinality = lambda a: metas[a.attribute].cardinality

    def honor_explicit(default_x, default_y, default_color=None):
        """Remap the default channel assignment around user-pinned channels."""
        slots = {"x": default_x, "y": default_y, "color": default_color}
        pinned = {a.channel: a for a in axes if a.channel is not None}
        if not pinned:
            return slots
        defaults = {
            ch: a for ch, a in slots.items() if a is not None and a.channel is None
        }
        free_axes = [a for a in defaults.values() if a not in pinned.values()]
        open_slots = [
            ch for ch, a in slots.items() if a is not None and ch not in pinned
        ]
        out = dict(pinned)
        for ch in open_slots:
            if free_axes:
                out[ch] = free_axes.pop(0)
        return {ch: out.get(ch) for ch in ("x", "y", "color")}

    def single_axis(mark, channel, **kw):
        # a y pin flips the axis with the synthetic count
        if axes[0].channel == "y":
            return CompiledVisSpec(mark=mark, x=COUNT_CHANNEL, y=channel, filters=filters, **kw)
        return CompiledVisSpec(mark=mark, x=channel, y=COUNT_CHANNEL, filters=filters, **kw)

    if signature == (_Q,):
        return single_axis("histogram", _channel(axes[0], default_bin=histogram_bins))

    if signature == (_N,):
        n = axes[0]
        return single_axis(
            "bar",
            _channel(n),
            sort_descending=True,
            category_limit=(
                BAR_CATEGORY_LIMIT if cardinality(n) > BAR_CATEGORY_LIMIT else None
            ),
        )

    if signature == (_T,):
        return single_axis("line", _channel(axes[0]))

    if signature == (_G,):
        return CompiledVisSpec(
            mark="map", x=_channel(axes[0]), y=COUNT_CHANNEL, filters=filters
        )

    if signature == (_Q, _Q):
        a, b = axes
        slots = honor_explicit(a, b)
        if row_count > SCATTER_ROW_LIMIT:
            return CompiledVisSpec(
                mark="heatmap",
                x=_channel(slots["x"], default_bin=heatmap_bins),
                y=_channel(slots["y"], default_bin=heatmap_bins),
                color=COUNT_CHANNEL,
                filters=filters,
            )
        return CompiledVisSpec(
            mark="scatter",
            x=_channel(slots["x"]),
            y=_channel(slots["y"]),
            filters=filters,
        )

    if signature == (_N, _Q):
        q, n = _pick(axes, _Q), _pick(axes, _N)
        slots = honor_explicit(n, q)
        x, y = slots["x"], slots["y"]
        return CompiledVisSpec(
            mark="bar",
            x=_channel(x) if x.semantic_type == _N else _channel(x, default_agg="mean"),
            y=_channel(y, default_agg="mean") if y.semantic_type == _Q else _channel(y),
            filters=filters,
        )

    if signature == (_Q, _T):
        q, t = _pick(axes, _Q), _pick(axes, _T)
        slots = honor_explicit(t, q)
        x, y = slots["x"], slots["y"]
        return CompiledVisSpec(
            mark="line",
            x=_channel(x) if x.semantic_type == _T else _channel(x, default_agg="mean"),
            y=_channel(y, default_agg="mean") if y.semantic_type == _Q else _channel(y),
            filters=filters,
        )

    if signature == (_G, _Q):
        q, g = _pick(axes, _Q), _pick(axes, _G)
        return CompiledVisSpec(
            mark="map",
            x=_channel(g),
            y=_channel(q, default_agg="mean"),
            filters=filters,
        )

    if signature == (_N, _N):
        a, b = axes
        color, x = (a, b) if cardinality(a) < cardinality(b) else (b, a)
        slots = honor_explicit(x, None, color)
        return CompiledVisSpec(
            mark="color-bar",
            x=_channel(slots["x"]),
            y=COUNT_CHANNEL,
            color=_channel(slots["color"]),
            filters=filters,
        )

    if signature == (_N, _Q, _Q):
        n = _pick(axes, _N)
        qs = [a for a in axes if a.semantic_type == _Q]
        slots = honor_explicit(qs[0], qs[1], n)
        if row_count > SCATTER_ROW_LIMIT:
            return CompiledVisSpec(
                mark="color-heatmap",
                x=_channel(slots["x"], default_bin=heatmap_bins),
                y=_channel(slots["y"], default_bin=heatmap_bins),
                color=_channel(slots["color"]),
                filters=filters,
            )
        return CompiledVisSpec(
            mark="color-scatter",
            x=_channel(slots["x"]),
            y=_channel(slots["y"]),
            color=_channel(slots["color"]),
            filters=filters,
        )

    if signature == (_N, _N, _Q):
        q = _pick(axes, _Q)
        ns = [a for a in axes if a.semantic_type == _N]
        color, x = (
            (ns[0], ns[1]) if cardinality(ns[0]) < cardinality(ns[1]) else (ns[1], ns[0])
        )
        slots = honor_explicit(x, q, color)
        return CompiledVisSpec(
            mark="color-bar",
            x=_channel(slots["x"]),
            y=_channel(slots["y"], default_agg="mean"),
            color=_channel(slots["color"]),
            filters=filters,
        )

    if signature == (_Q, _Q, _Q):
        a, b, c = axes
        slots = honor_explicit(a, b, c)
        return CompiledVisSpec(
            mark="color-heatmap",
            x=_channel(slots["x"], default_bin=heatmap_bins),
            y=_channel(slots["y"], default_bin=heatmap_bins),
            color=_channel(slots["color"], default_agg="mean"),
            filters=filters,
        )

    raise AssertionError(f"rule table is missing {signature}")


def compile_intent(
    intent: IntentSpec,
    metas: dict[str, ColumnMetadata],
    row_count: int,
) -> tuple[list[CompiledVisSpec], list[CompileDiagnostic]]:
    """Expand, look up and infer in one pass."""
    partials = expand_intent(intent, metas)
    kept, diagnostics = lookup_all(partials, metas)
    compiled = [infer_encoding(p, metas, row_count) for p in kept]
    return compiled, diagnostics
