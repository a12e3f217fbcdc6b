"""Correlations and distances between portfolio columns."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import ShapeError, UndefinedCorrelationError, UndefinedCosineError


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(getattr(x, "counts", x), dtype=float)
    y = np.asarray(getattr(y, "counts", y), dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ShapeError(f"vectors must have equal length, got {x.shape} and {y.shape}")
    return x, y


def pearson(x, y) -> float:
    x, y = _pair(x, y)
    if len(x) < 2:
        raise UndefinedCorrelationError("correlation needs at least two observations")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelationError("correlation is undefined for a constant vector")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def spearman(x, y) -> float:
    """Pearson correlation of mean ranks (ties share their average rank)."""
    x, y = _pair(x, y)
    if len(x) < 2:
        raise UndefinedCorrelationError("rank correlation needs at least two observations")
    return pearson(rankdata(x, method="average"), rankdata(y, method="average"))


def cosine_sim(x, y) -> float:
    x, y = _pair(x, y)
    xx, yy = float(x @ x), float(y @ y)
    if xx == 0 or yy == 0:
        raise UndefinedCosineError("cosine is undefined for a zero vector")
    # sqrt(fl(a * a)) == |a|, so identical vectors give exactly 1
    c = float(x @ y) / math.sqrt(xx * yy)
    return max(-1.0, min(1.0, c))


def restricted_spearman(x, y) -> tuple[float, int]:
    """Spearman over the classes where both vectors are positive.

    Returns the coefficient and the number of shared classes.  Fewer than two
    shared classes, or a constant vector on them, raise
    :class:`UndefinedCorrelationError` whose ``size`` attribute holds the
    number of shared classes.
    """
    x, y = _pair(x, y)
    both = (x > 0) & (y > 0)
    size = int(both.sum())
    try:
        if size < 2:
            raise UndefinedCorrelationError(f"only {size} classes are shared")
        return spearman(x[both], y[both]), size
    except UndefinedCorrelationError as exc:
        exc.size = size
        raise


@dataclass(frozen=True, eq=False)
class PortfolioDistanceMatrix:
    names: tuple[str, ...]
    d: np.ndarray

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        n = len(self.names)
        if d.shape != (n, n):
            raise ShapeError(f"distance matrix must be {n}x{n}")
        if not np.array_equal(d, d.T) or np.any(np.diag(d) != 0):
            raise ValueError("distance matrix must be symmetric with zero diagonal")
        d.setflags(write=False)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "d", d)

    @property
    def similarity(self) -> np.ndarray:
        s = 1.0 - self.d
        np.fill_diagonal(s, 0.0)
        return s


def distance_matrix(store_or_columns, names: Sequence[str] | None = None) -> PortfolioDistanceMatrix:
    """``1 - cosine`` between every pair of columns.

    Accepts a MatrixStore (optionally restricted to ``names``) or a sequence
    of ClassVectors.
    """
    if hasattr(store_or_columns, "columns"):
        columns = list(store_or_columns.columns)
    else:
        columns = list(store_or_columns)
    if names is not None:
        by_name = {c.name: c for c in columns}
        columns = [by_name[n] for n in names]
    if len(columns) < 2:
        raise ShapeError("a distance matrix needs at least two columns")
    for c in columns:
        if not np.any(np.asarray(c.counts)):
            raise UndefinedCosineError(f"column {c.name!r} is all zero")

    k = len(columns)
    d = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            d[i, j] = d[j, i] = min(1.0, max(0.0, 1.0 - cosine_sim(columns[i], columns[j])))
    return PortfolioDistanceMatrix(tuple(c.name for c in columns), d)
