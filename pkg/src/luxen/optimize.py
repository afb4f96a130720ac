"""Performance machinery: lazy memoization, approximate pruning, scheduling.

Three independent switches mirror the benchmark conditions:

  memoize  recommendations and metadata are computed only on demand and
           reused until a mutation expires them (wflow)
  prune    candidate scores are approximated on a capped cached row sample,
           then the selected top-k are recomputed exactly (prune)
  async    actions run cheapest-first on a small thread pool and stream
           results as they complete (async)
"""

from __future__ import annotations

import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .actions import (
    Action,
    ActionContext,
    ActionRegistry,
    Dashboard,
    Recommendation,
    Vis,
    dashboard_branch,
    default_registry,
    interestingness_score,
    rank_key,
)
from .compiler import SCATTER_ROW_LIMIT, expand_intent, infer_encoding, lookup_all
from .cost import FILTER_PASS_WEIGHT, MARK_WEIGHTS, estimate_vis_cost
from .errors import LuxenError
from .frame import Frame
from .metadata import compute_metadata
from .visdata import process_vis

DEFAULT_SAMPLE_CAP = 30000
DEFAULT_TOP_K = 15
DEFAULT_PRUNE_MARGIN = 2.0
DEFAULT_SEED = 17


@dataclass
class EngineConfig:
    sample_cap: int = DEFAULT_SAMPLE_CAP
    top_k: int = DEFAULT_TOP_K
    prune_margin: float = DEFAULT_PRUNE_MARGIN
    parallelism: int = 0  # 0 = available parallelism
    prune: bool = True
    async_scheduling: bool = True
    memoize: bool = True
    seed: int = DEFAULT_SEED

    def effective_parallelism(self) -> int:
        return self.parallelism if self.parallelism > 0 else (os.cpu_count() or 2)

    @classmethod
    def from_env(cls, **overrides) -> "EngineConfig":
        env = {
            "sample_cap": ("LUXEN_SAMPLE_CAP", int),
            "top_k": ("LUXEN_TOPK", int),
            "prune_margin": ("LUXEN_PRUNE_MARGIN", float),
            "parallelism": ("LUXEN_PARALLELISM", int),
        }
        kwargs = {}
        for name, (var, conv) in env.items():
            raw = os.environ.get(var)
            if raw is not None:
                kwargs[name] = conv(raw)
        kwargs.update(overrides)
        return cls(**kwargs)


class Counters:
    """Thread-safe instrumentation counters for tests and benchmarks."""

    def __init__(self):
        self._lock = threading.Lock()
        self._values: dict[str, float] = {}

    def inc(self, name: str, amount: float = 1) -> None:
        with self._lock:
            self._values[name] = self._values.get(name, 0) + amount

    def record_max(self, name: str, value: float) -> None:
        with self._lock:
            self._values[name] = max(self._values.get(name, 0), value)

    def get(self, name: str) -> float:
        with self._lock:
            return self._values.get(name, 0)

    def snapshot(self) -> dict[str, float]:
        with self._lock:
            return dict(self._values)

    def reset(self) -> None:
        with self._lock:
            self._values.clear()


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


@dataclass
class SampleCache:
    row_indexes: np.ndarray
    seed: int
    version: int
    cap: int


def make_sample(frame: Frame, cap: int, seed: int) -> SampleCache:
    """Uniform without-replacement row sample, cached per frame version.

    Frames at or under the cap get the identity sample. The RNG is seeded by
    (seed, version) so the same frame state always yields the same sample.
    """
    if cap < 1:
        raise ValueError("sample cap must be >= 1")
    cached = frame.sample_cache
    if (
        cached is not None
        and cached.version == frame.version
        and cached.seed == seed
        and cached.cap == cap
    ):
        return cached
    n = frame.row_count
    if n <= cap:
        idx = np.arange(n, dtype=np.int64)
    else:
        rng = np.random.default_rng([seed, frame.version])
        idx = np.sort(rng.choice(n, size=cap, replace=False)).astype(np.int64)
    cache = SampleCache(idx, seed, frame.version, cap)
    frame.sample_cache = cache
    return cache


# ---------------------------------------------------------------------------
# Pruning
# ---------------------------------------------------------------------------


@dataclass
class PruneDecision:
    N: int
    k: int
    t_exact: float
    t_approx: float
    apply: bool


def should_prune(
    N: int, k: int, t_exact: float, t_approx: float, margin: float = DEFAULT_PRUNE_MARGIN
) -> PruneDecision:
    """Apply pruning only when the two-pass cost clearly beats one exact pass.

    The candidate count must exceed k, and N*t_exact must exceed the
    two-pass cost N*t_approx + k*t_exact by the given margin factor.
    """
    apply = N > k and N * t_exact >= margin * (N * t_approx + k * t_exact)
    return PruneDecision(N, k, t_exact, t_approx, apply)


def approx_topk(
    candidates: list[Vis],
    scorer: Callable[[Vis, Optional[np.ndarray]], Optional[float]],
    frame: Frame,
    k: int,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
    seed: int = DEFAULT_SEED,
    key=None,
) -> list[Vis]:
    """Two-pass top-k: approximate scores on the sample pick the survivors,
    which are then rescored exactly and re-ranked.

    Returned vises always carry exact scores with ``approximate=False``.
    """
    if frame.row_count == 0:
        for v in candidates:
            v.score = scorer(v, None)
            v.approximate = False
        return sorted(candidates, key=key)[:k]

    sample = make_sample(frame, sample_cap, seed)
    for v in candidates:
        v.score = scorer(v, sample.row_indexes)
        v.approximate = True
    survivors = sorted(candidates, key=key)[:k]
    for v in survivors:
        v.score = scorer(v, None)
        v.approximate = False
    return sorted(survivors, key=key)


# ---------------------------------------------------------------------------
# Scheduling
# ---------------------------------------------------------------------------


@dataclass
class ScheduleEntry:
    action_name: str
    estimated_cost: float
    position: int = 0


def schedule_actions(
    entries: list[tuple[str, float, Callable[[], Recommendation]]],
    sink: Optional[Callable[[str, Recommendation], None]],
    parallelism: int = 1,
    start_log: Optional[list[str]] = None,
) -> dict[str, Recommendation]:
    """Run actions cheapest-first, streaming each result as it completes.

    ``entries`` are (name, estimated cost, runner) triples; ties keep input
    (registration) order. A failing action delivers an empty recommendation
    carrying the failure note; the others are unaffected. Results are
    delivered to ``sink`` immediately and also returned keyed by name.
    """
    order = sorted(range(len(entries)), key=lambda i: (entries[i][1], i))
    schedule = [
        ScheduleEntry(entries[i][0], entries[i][1], pos)
        for pos, i in enumerate(order)
    ]
    results: dict[str, Recommendation] = {}
    lock = threading.Lock()

    def run(i: int) -> None:
        name, _, runner = entries[i]
        if start_log is not None:
            with lock:
                start_log.append(name)
        try:
            rec = runner()
        except Exception as e:  # degenerate data must not sink the dashboard
            rec = Recommendation(name, [], note=f"action failed: {e}")
        with lock:
            results[name] = rec
        if sink is not None:
            sink(name, rec)

    if parallelism <= 1:
        for i in order:
            run(i)
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            futures = [pool.submit(run, i) for i in order]
            for f in futures:
                f.result()
    return results


# ---------------------------------------------------------------------------
# Action cost prediction
# ---------------------------------------------------------------------------


def predicted_action_cost(action: Action, ctx: ActionContext) -> float:
    """Sum of member vis costs, derived from metadata without materializing
    the candidates.

    Candidate generation is part of an action's scheduled work, so ordering
    has to rely on predicted search-space sizes; for the metadata-based
    overview actions the prediction equals the exact compiled-candidate sum.
    """
    metas, n = ctx.metas, ctx.frame.row_count
    w = MARK_WEIGHTS

    def usable(semantic_type: str) -> int:
        return sum(
            1
            for m in metas.values()
            if m.semantic_type == semantic_type and m.cardinality > 0
        )

    kind = action.kind
    if kind == "correlation":
        q = usable("quantitative")
        pairs = q * (q - 1) // 2
        mark = "heatmap" if n > SCATTER_ROW_LIMIT else "scatter"
        return pairs * w[mark] * n
    if kind == "distribution":
        return usable("quantitative") * w["histogram"] * n
    if kind == "occurrence":
        return usable("nominal") * w["bar"] * n
    if kind == "temporal":
        return usable("temporal") * w["line"] * n
    if kind == "geographic":
        return usable("geographic") * w["map"] * n
    if kind == "current":
        return sum(estimate_vis_cost(s, metas, n) for s in ctx.compiled_specs)
    if kind == "enhance":
        base = ctx.base_partial
        used = 0 if base is None else len(base.axes) + len(base.filters)
        candidates = max(0, len(metas) - used)
        return candidates * w["color-scatter"] * n
    if kind == "filter":
        base = ctx.base_partial
        filtered = set() if base is None else {f.attribute for f in base.filters}
        values = sum(
            m.cardinality
            for name, m in metas.items()
            if name not in filtered and 1 <= m.cardinality <= 40
        )
        return values * (w["bar"] + FILTER_PASS_WEIGHT) * n
    if kind in ("series", "structure"):
        return max(1, len(metas)) * w["bar"] * n
    if kind == "history":
        return float(n)
    return max(1, len(metas)) * w["bar"] * n  # custom actions


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------


class Engine:
    """Owns configuration, the action registry and instrumentation counters."""

    def __init__(
        self,
        config: Optional[EngineConfig] = None,
        registry: Optional[ActionRegistry] = None,
    ):
        self.config = config or EngineConfig()
        self.registry = registry or default_registry()
        self.counters = Counters()

    # -- metadata ------------------------------------------------------------

    def metadata(self, frame: Frame):
        if not frame.metadata_cache_valid():
            self.counters.inc("metadata_computes")
        return compute_metadata(frame)

    # -- scoring with instrumentation ----------------------------------------

    def _scorer(self, frame, metas, kind):
        def score(vis: Vis, rows: Optional[np.ndarray]) -> Optional[float]:
            touched = len(rows) if rows is not None else frame.row_count
            self.counters.inc("scoring_calls")
            self.counters.inc("scoring_rows_total", touched)
            if rows is not None:
                self.counters.record_max("approx_scoring_rows_max", touched)
            return interestingness_score(vis, frame, metas, kind, rows)

        return score

    # -- the lookup/compute entry point ---------------------------------------

    def _cache_key(self, k: int) -> tuple:
        c = self.config
        return (k, c.prune, c.sample_cap, c.prune_margin, c.seed)

    def recommend(
        self,
        frame: Frame,
        k: Optional[int] = None,
        sink: Optional[Callable[[str, Recommendation], None]] = None,
    ) -> Dashboard:
        """Return the dashboard for a frame, from cache when stamps match.

        Never called by transforms; this is the print-time path. On a cache
        hit, cached recommendations are replayed to ``sink`` in their
        original delivery order without recomputation. The cache entry also
        remembers k and the scoring-relevant config so a different request
        shape recomputes instead of serving a mismatched dashboard.
        """
        k = k if k is not None else self.config.top_k
        key = self._cache_key(k)
        if self.config.memoize:
            with frame._lock:
                if (
                    frame.rec_cache_valid()
                    and len(frame.rec_cache) == 4
                    and frame.rec_cache[3] == key
                ):
                    dashboard = frame.rec_cache[0]
                    self.counters.inc("rec_cache_hits")
                    if sink is not None:
                        for name in dashboard.delivery_order:
                            rec = dashboard.recommendation(name)
                            if rec is not None:
                                sink(name, rec)
                    return dashboard

        dashboard = self._produce(frame, k, sink)
        if self.config.memoize:
            with frame._lock:
                frame.rec_cache = (dashboard, frame.version, frame.intent_version, key)
        self.counters.inc("rec_computes")
        frame.rec_computes += 1
        return dashboard

    # alias matching the operational vocabulary
    def lookup_or_compute(self, frame: Frame, k: Optional[int] = None, sink=None) -> Dashboard:
        return self.recommend(frame, k, sink)

    # -- dashboard production --------------------------------------------------

    def _compile_intent_context(self, frame: Frame, metas) -> tuple[list, object, list[str]]:
        intent = frame.intent
        if intent is None:
            return [], None, []
        diagnostics: list[str] = []
        try:
            partials = expand_intent(intent, metas)
            kept, look_diags = lookup_all(partials, metas)
            compiled = [infer_encoding(p, metas, frame.row_count) for p in kept]
            base = None
            if len(partials) == 1:
                if kept:
                    base = kept[0]
                elif not partials[0].axes and all(
                    f.attribute in metas for f in partials[0].filters
                ):
                    base = partials[0]
            if not compiled and base is None:
                diagnostics.append(
                    "intent did not compile to any visualization; showing overview"
                )
            return compiled, base, diagnostics
        except LuxenError as e:
            return [], None, [f"intent could not be applied: {e}"]

    def _produce(self, frame: Frame, k: int, sink) -> Dashboard:
        metas = self.metadata(frame)
        compiled, base_partial, diagnostics = self._compile_intent_context(frame, metas)
        has_intent_base = bool(compiled) or base_partial is not None
        branch = (
            "intent" if has_intent_base else dashboard_branch(frame, False)
        )
        ctx = ActionContext(
            frame=frame,
            metas=metas,
            intent=frame.intent,
            compiled_specs=compiled,
            base_partial=base_partial,
            branch=branch,
            k=k,
            engine=self,
        )

        triggered = [a for a in self.registry if a.trigger(ctx)]
        entries = [
            (
                action.name,
                predicted_action_cost(action, ctx),
                self._action_runner(action, ctx),
            )
            for action in triggered
        ]

        parallelism = (
            self.config.effective_parallelism() if self.config.async_scheduling else 1
        )
        delivery_order: list[str] = []
        start_log: list[str] = []
        cost_by_name = {name: cost for name, cost, _ in entries}

        def tracking_sink(name: str, rec: Recommendation) -> None:
            delivery_order.append(name)
            if sink is not None:
                sink(name, rec)

        results = schedule_actions(entries, tracking_sink, parallelism, start_log)

        recommendations = []
        current_vis = None
        for action in triggered:
            rec = results.get(action.name)
            if rec is None:
                continue
            if action.kind == "current" and len(rec.vises) == 1 and len(compiled) == 1:
                current_vis = rec.vises[0]
            recommendations.append(rec)
        if not recommendations:
            diagnostics.append("no qualifying columns for any action")
        return Dashboard(
            current_vis=current_vis,
            recommendations=recommendations,
            diagnostics=diagnostics,
            delivery_order=delivery_order,
            schedule_log=[(name, cost_by_name[name]) for name in start_log],
        )

    def _action_runner(self, action: Action, ctx: ActionContext):
        """Generation is part of the scheduled work, not of the print path."""

        def run() -> Recommendation:
            if action.kind == "history":
                return self._history_recommendation(ctx.frame, ctx.k)
            candidates = action.generate(ctx)
            return self._rank_and_fill(action, candidates, ctx)

        return run

    def _history_recommendation(self, frame: Frame, k: int) -> Recommendation:
        parent = frame.parent
        if parent is None:
            return Recommendation(
                "History", [], note="parent frame is no longer reachable"
            )
        parent_dash = self.recommend(parent, k)
        vises: list[Vis] = []
        for rec in parent_dash.recommendations:
            for v in rec.vises:
                vises.append(
                    Vis(v.spec, parent.version, data=v.data, score=None, aux=dict(v.aux))
                )
        truncated = len(vises) > k
        return Recommendation(
            "History",
            vises[:k],
            truncated_to_k=truncated,
            note="computed over the parent frame: this frame has too few rows",
        )

    def _rank_and_fill(
        self, action: Action, candidates: list[Vis], ctx: ActionContext
    ) -> Recommendation:
        frame, metas, k = ctx.frame, ctx.metas, ctx.k
        if action.sortable and action.kind not in ("occurrence", "temporal", "geographic"):
            key = rank_key(action.kind)
            scorer = self._scorer(frame, metas, action.kind)
            n = frame.row_count
            N = len(candidates)
            sample_size = min(n, self.config.sample_cap)
            t_exact = float(
                np.mean(
                    [estimate_vis_cost(v.spec, metas, n) for v in candidates]
                )
            ) if candidates else 0.0
            t_approx = t_exact * (sample_size / n) if n > 0 else 0.0
            decision = should_prune(N, k, t_exact, t_approx, self.config.prune_margin)
            if (
                self.config.prune
                and action.prunable
                and decision.apply
                and n > 0
            ):
                self.counters.inc("pruned_actions")
                ranked = approx_topk(
                    candidates,
                    scorer,
                    frame,
                    k,
                    sample_cap=self.config.sample_cap,
                    seed=self.config.seed,
                    key=key,
                )
            else:
                for v in candidates:
                    v.score = scorer(v, None)
                    v.approximate = False
                ranked = sorted(candidates, key=key)
        elif action.sortable:
            ranked = sorted(candidates, key=rank_key(action.kind))
        else:
            ranked = candidates

        top: list[Vis] = []
        for vis in ranked:
            if len(top) >= k:
                break
            if vis.data is None:
                vis.data = process_vis(vis.spec, frame)
                self.counters.inc("vis_processed")
            if vis.data.is_empty:
                continue
            top.append(vis)
        return Recommendation(
            action.name, top, truncated_to_k=len(candidates) > len(top)
        )

