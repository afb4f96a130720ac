"""Actions turn a frame (plus optional intent) into ranked recommendations.

An action names a search space (generated through the same intent language
users write), a scoring kind, a trigger predicate and a display position.
The registry holds the defaults plus any custom actions; the optimizer
decides execution order and pruning.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .compiler import (
    AxisSpec,
    ChannelSpec,
    CompiledVisSpec,
    FilterSpec,
    PartialVisSpec,
    compile_intent,
    infer_encoding,
    lookup_defaults,
)
from .errors import DuplicateActionError
from .frame import Frame, SMALL_FRAME_ROWS
from .intent import ClauseSpec, IntentSpec
from .metadata import ColumnMetadata, NOMINAL_INT_CARDINALITY, columns_of_type
from .scoring import (
    distribution_distance,
    group_mean_deviation,
    normalized_distribution,
    pearson_columns,
    skewness_column,
)
from .visdata import VisData

FILTER_CANDIDATE_CARDINALITY = NOMINAL_INT_CARDINALITY


@dataclass
class Vis:
    """One visualization: spec + (optionally) extracted data and a score."""

    spec: CompiledVisSpec
    frame_version: int
    data: Optional[VisData] = None
    score: Optional[float] = None
    approximate: bool = False
    aux: dict = field(default_factory=dict)

    @property
    def signature(self) -> str:
        return self.spec.signature()


@dataclass
class Recommendation:
    action_name: str
    vises: list[Vis]
    truncated_to_k: bool = False
    note: Optional[str] = None


@dataclass
class Dashboard:
    current_vis: Optional[Vis]
    recommendations: list[Recommendation]
    diagnostics: list[str] = field(default_factory=list)
    delivery_order: list[str] = field(default_factory=list)
    schedule_log: list[tuple[str, float]] = field(default_factory=list)

    def recommendation(self, name: str) -> Optional[Recommendation]:
        for rec in self.recommendations:
            if rec.action_name == name:
                return rec
        return None

    @property
    def action_names(self) -> list[str]:
        return [r.action_name for r in self.recommendations]


@dataclass
class ActionContext:
    """Everything an action needs: an immutable frame snapshot plus compiled intent."""

    frame: Frame
    metas: dict[str, ColumnMetadata]
    intent: Optional[IntentSpec]
    compiled_specs: list[CompiledVisSpec]
    base_partial: Optional[PartialVisSpec]
    branch: str
    k: int
    engine: object = None  # set by the optimizer; history recurses through it


@dataclass
class Action:
    name: str
    kind: str
    display_order: int
    trigger: Callable[[ActionContext], bool]
    generate: Callable[[ActionContext], list[Vis]]
    sortable: bool = True
    prunable: bool = False


class ActionRegistry:
    """Ordered action registry; names are unique, defaults come first."""

    def __init__(self):
        self._actions: dict[str, Action] = {}

    def register(self, action: Action) -> None:
        if action.name in self._actions:
            raise DuplicateActionError(f"action {action.name!r} is already registered")
        self._actions[action.name] = action

    def __iter__(self):
        registration = {name: i for i, name in enumerate(self._actions)}
        return iter(
            sorted(
                self._actions.values(),
                key=lambda a: (a.display_order, registration[a.name]),
            )
        )

    def __contains__(self, name: str) -> bool:
        return name in self._actions

    def get(self, name: str) -> Action:
        return self._actions[name]


def register_action(registry: ActionRegistry, action: Action) -> None:
    registry.register(action)


def register_custom_action(
    registry: ActionRegistry,
    name: str,
    trigger: Callable[[Frame, dict, Optional[IntentSpec]], bool],
    generate: Callable[[Frame, dict, Optional[IntentSpec]], list],
) -> None:
    """Register a host-language callback action.

    ``generate`` receives a read-only frame view plus its metadata and
    returns (spec, score) pairs; scores may be None for unscored results.
    """

    def _trigger(ctx: ActionContext) -> bool:
        return bool(trigger(ctx.frame, ctx.metas, ctx.intent))

    def _generate(ctx: ActionContext) -> list[Vis]:
        out = []
        for item in generate(ctx.frame, ctx.metas, ctx.intent):
            spec, score = item if isinstance(item, tuple) else (item, None)
            out.append(Vis(spec, ctx.frame.version, score=score))
        return out

    registry.register(
        Action(
            name=name,
            kind="custom",
            display_order=100,
            trigger=_trigger,
            generate=_generate,
        )
    )


# ---------------------------------------------------------------------------
# Branch dispatch
# ---------------------------------------------------------------------------


def dashboard_branch(frame: Frame, has_intent_base: bool) -> str:
    """Which family of actions applies to this frame right now."""
    if has_intent_base:
        return "intent"
    if frame.pre_aggregated:
        return "structure"
    if len(frame.columns) == 1:
        return "series"
    if (
        frame.row_count < SMALL_FRAME_ROWS
        and frame.history
        and frame.history[-1].kind in ("filter", "head-tail")
    ):
        return "history"
    return "overview"


# ---------------------------------------------------------------------------
# Search-space generators (expressed through the intent language)
# ---------------------------------------------------------------------------


def _wildcard_intent(*constraints: Optional[str]) -> IntentSpec:
    return IntentSpec(
        tuple(ClauseSpec("axis", wildcard=True, constraint=c) for c in constraints)
    )


def _compile_to_vises(ctx: ActionContext, intent: IntentSpec) -> list[Vis]:
    specs, _ = compile_intent(intent, ctx.metas, ctx.frame.row_count)
    return [Vis(s, ctx.frame.version) for s in specs]


def correlation_candidates(ctx: ActionContext) -> list[Vis]:
    """All quantitative pairs, symmetric-deduped by the expander."""
    return _compile_to_vises(ctx, _wildcard_intent("quantitative", "quantitative"))


def distribution_candidates(ctx: ActionContext) -> list[Vis]:
    return _compile_to_vises(ctx, _wildcard_intent("quantitative"))


def _univariate_with_cardinality(ctx: ActionContext, semantic_type: str) -> list[Vis]:
    vises = _compile_to_vises(ctx, _wildcard_intent(semantic_type))
    for v in vises:
        attr = v.spec.referenced_attributes()[0]
        v.aux["cardinality"] = ctx.metas[attr].cardinality
        v.score = 0.0
    return vises


def occurrence_candidates(ctx: ActionContext) -> list[Vis]:
    return _univariate_with_cardinality(ctx, "nominal")


def temporal_candidates(ctx: ActionContext) -> list[Vis]:
    return _univariate_with_cardinality(ctx, "temporal")


def geographic_candidates(ctx: ActionContext) -> list[Vis]:
    return _univariate_with_cardinality(ctx, "geographic")


def current_candidates(ctx: ActionContext) -> list[Vis]:
    return [Vis(s, ctx.frame.version) for s in ctx.compiled_specs]


def enhance_candidates(ctx: ActionContext) -> list[Vis]:
    """Base vis plus one additional attribute, re-encoded through the rules."""
    base = ctx.base_partial
    if base is None or len(base.axes) >= 3:
        return []
    used = set(base.axis_attributes) | {f.attribute for f in base.filters}
    out = []
    for name in ctx.metas:
        if name in used:
            continue
        partial = PartialVisSpec(base.axes + (AxisSpec(name),), base.filters)
        kept, _ = lookup_defaults(partial, ctx.metas)
        if kept is None:
            continue
        spec = infer_encoding(kept, ctx.metas, ctx.frame.row_count)
        out.append(Vis(spec, ctx.frame.version, aux={"added": name}))
    return out


def filter_candidates(ctx: ActionContext) -> list[Vis]:
    """Base vis plus one extra equality filter over low-cardinality columns."""
    base = ctx.base_partial
    if base is None or not base.axes:
        return []
    filtered_attrs = {f.attribute for f in base.filters}
    target = base.axes[0]
    out = []
    for name, meta in ctx.metas.items():
        if name in filtered_attrs or not (1 <= meta.cardinality <= FILTER_CANDIDATE_CARDINALITY):
            continue
        for value in meta.unique_values:
            partial = PartialVisSpec(
                base.axes, base.filters + (FilterSpec(name, "=", str(value)),)
            )
            kept, _ = lookup_defaults(partial, ctx.metas)
            if kept is None:
                continue
            spec = infer_encoding(kept, ctx.metas, ctx.frame.row_count)
            out.append(
                Vis(
                    spec,
                    ctx.frame.version,
                    aux={
                        "filter_attr": name,
                        "filter_value": str(value),
                        "target": target.attribute,
                        "target_type": target.semantic_type,
                    },
                )
            )
    return out


def series_candidates(ctx: ActionContext) -> list[Vis]:
    """Univariate vis for a single-column frame, per its semantic type."""
    name = ctx.frame.columns[0].name
    intent = IntentSpec((ClauseSpec("axis", attributes=(name,)),))
    return _compile_to_vises(ctx, intent)


def _labels_are_temporal(labels: list[str]) -> bool:
    from .frame import parse_iso_datetime

    if not labels:
        return False
    parsed = sum(1 for s in labels if parse_iso_datetime(str(s)) is not None)
    return parsed / len(labels) >= 0.95


def structure_candidates(ctx: ActionContext) -> list[Vis]:
    """Index-based vises for pre-aggregated frames.

    Homogeneous quantitative columns are grouped row-wise (one series per
    row, column labels on x); otherwise each quantitative column is plotted
    column-wise against the row labels.
    """
    frame = ctx.frame
    quantitative = {
        c.name
        for c in frame.columns
        if ctx.metas[c.name].semantic_type == "quantitative"
        or c.storage_type in ("integer", "float")
    }
    homogeneous = len(quantitative) == len(frame.columns) and len(frame.columns) > 1
    out: list[Vis] = []

    if homogeneous:
        names = frame.column_names
        temporal = _labels_are_temporal(names)
        mark = "line" if temporal else "bar"
        x_type = "temporal" if temporal else "nominal"
        for r in range(frame.row_count):
            label = str(frame.row_labels[r])
            xs, ys = [], []
            for c in frame.columns:
                if not c.mask[r]:
                    xs.append(c.name)
                    ys.append(c.cell(r))
            spec = CompiledVisSpec(
                mark=mark,
                x=ChannelSpec("series", x_type),
                y=ChannelSpec(label, "quantitative"),
            )
            data = VisData({"series": xs, label: ys}, len(xs))
            out.append(Vis(spec, frame.version, data=data, aux={"row": label}))
        return out

    labels = [str(v) for v in frame.row_labels]
    temporal = _labels_are_temporal(labels)
    mark = "line" if temporal else "bar"
    x_type = "temporal" if temporal else "nominal"
    for c in frame.columns:
        if c.name not in quantitative:
            continue
        xs, ys = [], []
        for r in range(frame.row_count):
            if not c.mask[r]:
                xs.append(labels[r])
                ys.append(c.cell(r))
        spec = CompiledVisSpec(
            mark=mark,
            x=ChannelSpec("index", x_type),
            y=ChannelSpec(c.name, "quantitative"),
        )
        data = VisData({"index": xs, c.name: ys}, len(xs))
        out.append(Vis(spec, frame.version, data=data, aux={"column": c.name}))
    return out


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------


def interestingness_score(
    vis: Vis,
    frame: Frame,
    metas: dict[str, ColumnMetadata],
    kind: str,
    rows: Optional[np.ndarray] = None,
) -> Optional[float]:
    """Score one candidate for an action kind; None means rank-last.

    ``rows`` restricts scoring to a row subset (the approximate pass);
    omitted means the full frame.
    """
    spec = vis.spec
    if kind == "correlation":
        a, b = spec.x.attribute, spec.y.attribute
        r = pearson_columns(frame.column(a), frame.column(b), rows)
        return None if r is None else abs(r)

    if kind == "distribution":
        attr = spec.x.attribute if spec.x.attribute is not None else spec.y.attribute
        s = skewness_column(frame.column(attr), rows)
        return None if s is None else abs(s)

    if kind in ("occurrence", "temporal", "geographic"):
        return 0.0

    if kind == "enhance":
        return _enhance_score(vis, frame, metas, rows)

    if kind == "filter":
        return _filter_score(vis, frame, metas, rows)

    return vis.score


def _anchor_measure(spec: CompiledVisSpec, exclude: str) -> Optional[str]:
    for _, ch in spec.channels():
        if (
            ch.attribute is not None
            and ch.attribute != exclude
            and ch.semantic_type == "quantitative"
        ):
            return ch.attribute
    return None


def _enhance_score(vis, frame, metas, rows) -> Optional[float]:
    added = vis.aux.get("added")
    if added is None:
        return 0.0
    anchor = _anchor_measure(vis.spec, exclude=added)
    added_meta = metas[added]
    if added_meta.semantic_type == "quantitative":
        if anchor is not None:
            r = pearson_columns(frame.column(added), frame.column(anchor), rows)
            return 0.0 if r is None else abs(r)
        # no existing measure: how strongly do the base's groups separate it
        group_attr = next(
            (
                ch.attribute
                for _, ch in vis.spec.channels()
                if ch.attribute is not None and ch.attribute != added
            ),
            None,
        )
        if group_attr is None:
            return 0.0
        eta = group_mean_deviation(frame.column(added), frame.column(group_attr), rows)
        return 0.0 if eta is None else eta
    if anchor is None:
        return 0.0
    eta = group_mean_deviation(frame.column(anchor), frame.column(added), rows)
    return 0.0 if eta is None else eta


def _filter_score(vis, frame, metas, rows) -> Optional[float]:
    target = vis.aux.get("target")
    if target is None:
        return 0.0
    target_type = vis.aux.get("target_type") or metas[target].semantic_type
    base_filters = tuple(
        f
        for f in vis.spec.filters
        if not (
            f.attribute == vis.aux.get("filter_attr")
            and str(f.value) == str(vis.aux.get("filter_value"))
        )
    )

    from .frame import filter_mask

    n = frame.row_count
    base_mask = np.ones(n, dtype=bool)
    for f in base_filters:
        base_mask &= filter_mask(frame.column(f.attribute), f.op, f.value)
    if rows is not None:
        sel = np.zeros(n, dtype=bool)
        sel[rows] = True
        base_mask &= sel
    new_mask = base_mask & filter_mask(
        frame.column(vis.aux["filter_attr"]), "=", vis.aux["filter_value"]
    )

    col = frame.column(target)
    base_rows = np.flatnonzero(base_mask)
    new_rows = np.flatnonzero(new_mask)
    if len(base_rows) == 0 or len(new_rows) == 0:
        return 0.0

    if target_type == "quantitative":
        keep = base_mask & ~col.mask
        vals = col.values[keep].astype(np.float64)
        if len(vals) == 0:
            return 0.0
        lo, hi = float(vals.min()), float(vals.max())
        p = normalized_distribution(col, base_rows, "quantitative", lo=lo, hi=hi)
        q = normalized_distribution(col, new_rows, "quantitative", lo=lo, hi=hi)
    else:
        meta = metas[target]
        cats = meta.unique_values if not meta.capped else None
        p = normalized_distribution(col, base_rows, target_type, categories=cats)
        q = normalized_distribution(col, new_rows, target_type, categories=cats)
    if p is None or q is None:
        return 0.0
    return distribution_distance(p, q)


# ---------------------------------------------------------------------------
# Ranking
# ---------------------------------------------------------------------------


def rank_key(kind: str):
    """Stable sort key per action kind: score descending, undefined last,
    ties broken by axis attribute names; the unscored univariate overviews
    order by cardinality ascending instead."""
    if kind in ("occurrence", "temporal", "geographic"):
        return lambda v: (v.aux.get("cardinality", 0), v.spec.referenced_attributes())

    def key(v: Vis):
        undefined = v.score is None
        return (1 if undefined else 0, -(v.score or 0.0), v.spec.referenced_attributes())

    return key


def default_registry() -> ActionRegistry:
    """The engine's built-in actions in canonical display order."""
    reg = ActionRegistry()
    reg.register(
        Action(
            "Current",
            kind="current",
            display_order=0,
            trigger=lambda ctx: ctx.branch == "intent" and bool(ctx.compiled_specs),
            generate=current_candidates,
            sortable=False,
        )
    )
    reg.register(
        Action(
            "Enhance",
            kind="enhance",
            display_order=1,
            trigger=lambda ctx: ctx.branch == "intent"
            and ctx.base_partial is not None
            and len(ctx.compiled_specs) <= 1,
            generate=enhance_candidates,
            prunable=True,
        )
    )
    reg.register(
        Action(
            "Filter",
            kind="filter",
            display_order=2,
            trigger=lambda ctx: ctx.branch == "intent"
            and ctx.base_partial is not None
            and len(ctx.base_partial.axes) > 0
            and len(ctx.compiled_specs) <= 1,
            generate=filter_candidates,
            prunable=True,
        )
    )
    reg.register(
        Action(
            "Correlation",
            kind="correlation",
            display_order=3,
            trigger=lambda ctx: ctx.branch == "overview"
            and len(columns_of_type(ctx.metas, "quantitative")) >= 2,
            generate=correlation_candidates,
            prunable=True,
        )
    )
    reg.register(
        Action(
            "Distribution",
            kind="distribution",
            display_order=4,
            trigger=lambda ctx: ctx.branch == "overview"
            and _has_usable(ctx, "quantitative"),
            generate=distribution_candidates,
            prunable=True,
        )
    )
    reg.register(
        Action(
            "Occurrence",
            kind="occurrence",
            display_order=5,
            trigger=lambda ctx: ctx.branch == "overview" and _has_usable(ctx, "nominal"),
            generate=occurrence_candidates,
        )
    )
    reg.register(
        Action(
            "Temporal",
            kind="temporal",
            display_order=6,
            trigger=lambda ctx: ctx.branch == "overview" and _has_usable(ctx, "temporal"),
            generate=temporal_candidates,
        )
    )
    reg.register(
        Action(
            "Geographic",
            kind="geographic",
            display_order=7,
            trigger=lambda ctx: ctx.branch == "overview"
            and _has_usable(ctx, "geographic"),
            generate=geographic_candidates,
        )
    )
    reg.register(
        Action(
            "Series",
            kind="series",
            display_order=3,
            trigger=lambda ctx: ctx.branch == "series",
            generate=series_candidates,
            sortable=False,
        )
    )
    reg.register(
        Action(
            "Structure",
            kind="structure",
            display_order=3,
            trigger=lambda ctx: ctx.branch == "structure",
            generate=structure_candidates,
            sortable=False,
        )
    )
    reg.register(
        Action(
            "History",
            kind="history",
            display_order=3,
            trigger=lambda ctx: ctx.branch == "history",
            generate=lambda ctx: [],  # materialized by the optimizer via the parent
            sortable=False,
        )
    )
    return reg


def _has_usable(ctx: ActionContext, semantic_type: str) -> bool:
    return any(
        m.semantic_type == semantic_type and m.cardinality > 0
        for m in ctx.metas.values()
    )
