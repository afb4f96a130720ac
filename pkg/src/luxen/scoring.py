"""Interestingness scoring primitives.

Pearson correlation is the published ranking signal for pairwise
quantitative views. The remaining formulas (skewness for distributions, a
correlation-ratio style deviation for color breakdowns, Euclidean distance
between normalized distributions for filters) are engine choices kept
behind this module so they can be swapped without touching the actions.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .frame import Column
from .visdata import assign_bins


def pearson(x: np.ndarray, y: np.ndarray) -> Optional[float]:
    """Sample Pearson r over two equal-length float arrays.

    Returns None (undefined) for fewer than two pairs or zero variance on
    either side; callers rank undefined scores last.
    """
    n = len(x)
    if n < 2:
        return None
    mx, my = x.mean(), y.mean()
    dx, dy = x - mx, y - my
    ssx = float(np.dot(dx, dx))
    ssy = float(np.dot(dy, dy))
    if ssx == 0.0 or ssy == 0.0:
        return None
    return float(np.dot(dx, dy) / np.sqrt(ssx * ssy))


def pearson_columns(
    a: Column, b: Column, rows: Optional[np.ndarray] = None
) -> Optional[float]:
    """Pearson r with pairwise-complete null deletion, optionally on a row subset."""
    if rows is not None:
        keep = rows[~(a.mask[rows] | b.mask[rows])]
    else:
        keep = ~(a.mask | b.mask)
    x = a.values[keep].astype(np.float64)
    y = b.values[keep].astype(np.float64)
    return pearson(x, y)


def skewness(values: np.ndarray) -> Optional[float]:
    """Biased sample skewness g1 = m3 / m2^(3/2); None when undefined."""
    n = len(values)
    if n < 2:
        return None
    mean = values.mean()
    d = values - mean
    m2 = float(np.mean(d * d))
    if m2 == 0.0:
        return None
    m3 = float(np.mean(d * d * d))
    return m3 / m2**1.5


def skewness_column(col: Column, rows: Optional[np.ndarray] = None) -> Optional[float]:
    if rows is not None:
        keep = rows[~col.mask[rows]]
    else:
        keep = ~col.mask
    return skewness(col.values[keep].astype(np.float64))


def group_mean_deviation(
    measure: Column, groups: Column, rows: Optional[np.ndarray] = None
) -> Optional[float]:
    """Correlation ratio (eta) of a measure across the color-induced groups.

    sqrt(between-group sum of squares / total sum of squares), in [0, 1];
    comparable in scale to |pearson| so quantitative and nominal enhance
    candidates rank on one axis.
    """
    if rows is not None:
        keep = rows[~(measure.mask[rows] | groups.mask[rows])]
    else:
        keep = ~(measure.mask | groups.mask)
    vals = measure.values[keep].astype(np.float64)
    if len(vals) < 2:
        return None
    grand = vals.mean()
    total = float(np.sum((vals - grand) ** 2))
    if total == 0.0:
        return None
    keys = groups.values[keep]
    between = 0.0
    for key in np.unique(keys.astype(str) if keys.dtype == object else keys):
        member = vals[(keys.astype(str) if keys.dtype == object else keys) == key]
        between += len(member) * (member.mean() - grand) ** 2
    return float(np.sqrt(between / total))


def normalized_distribution(
    col: Column,
    rows: np.ndarray,
    semantic_type: str,
    categories: Optional[list] = None,
    bins: int = 10,
    lo: Optional[float] = None,
    hi: Optional[float] = None,
) -> Optional[np.ndarray]:
    """Probability vector of a column over a row subset.

    Quantitative columns are histogram-binned over [lo, hi] (shared edges
    keep two distributions comparable); other types count occurrences over
    the supplied category list.
    """
    keep = np.zeros(len(col), dtype=bool)
    keep[rows] = True
    keep &= ~col.mask
    if semantic_type == "quantitative":
        vals = col.values[keep].astype(np.float64)
        if len(vals) == 0 or lo is None or hi is None:
            return None
        counts = np.bincount(assign_bins(vals, lo, hi, bins), minlength=bins).astype(
            np.float64
        )
    else:
        if not categories:
            return None
        index = {str(c): i for i, c in enumerate(categories)}
        counts = np.zeros(len(categories), dtype=np.float64)
        sel = np.flatnonzero(keep)
        for i in sel:
            key = str(col.cell(int(i)))
            if key in index:
                counts[index[key]] += 1
        if counts.sum() == 0:
            return None
    total = counts.sum()
    return counts / total if total > 0 else None


def distribution_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Euclidean distance between two normalized distributions."""
    return float(np.sqrt(np.sum((p - q) ** 2)))
