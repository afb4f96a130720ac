"""Cost model: abstract work units proportional to predicted processing time.

Costs are linear in source rows with a per-mark weight reflecting the
relational recipe behind the mark (projection < group-by < 2D binning <
binning plus group-by); each filter adds half a pass. The weights mirror
the relative complexity of the operations and can be tuned without touching
callers.
"""

from __future__ import annotations

from .compiler import CompiledVisSpec

CostEstimate = float

MARK_WEIGHTS = {
    "scatter": 1.0,
    "color-scatter": 1.5,
    "bar": 2.0,
    "line": 2.0,
    "color-bar": 3.0,
    "color-line": 3.0,
    "histogram": 2.0,
    "heatmap": 4.0,
    "color-heatmap": 6.0,
    "map": 2.0,
}

FILTER_PASS_WEIGHT = 0.5


def estimate_vis_cost(spec: CompiledVisSpec, metas: dict, row_count: int) -> CostEstimate:
    """Predicted work units for processing one vis over ``row_count`` rows."""
    base = row_count * MARK_WEIGHTS[spec.mark]
    return base + row_count * FILTER_PASS_WEIGHT * len(spec.filters)
