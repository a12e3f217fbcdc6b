"""Portfolio diversity: variety, Gini-Simpson, Rao-Stirling and true diversity.

Rao-Stirling diversity weighs every ordered pair of distinct classes by the
product of their shares and their disparity ``1 - cosine`` on the base map.
Sums are accumulated with :func:`math.fsum`, which is exactly rounded and
independent of term order; with an identity similarity matrix the Rao-Stirling
terms are bit-identical to the Gini-Simpson terms, so the two agree exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Sequence

import numpy as np

from .errors import DomainError, EmptyPortfolioError, ShapeError
from .taxonomy import ClassSimilarityMap


def _counts(v) -> np.ndarray:
    return np.asarray(getattr(v, "counts", v))


def proportions(v) -> np.ndarray:
    """Shares of each class; ``v`` is a ClassVector or a count array."""
    counts = _counts(v).astype(float)
    if (counts < 0).any():
        raise ValueError("counts must be non-negative")
    total = counts.sum()
    if total <= 0:
        name = getattr(v, "name", None)
        label = f"portfolio {name!r}" if name else "portfolio"
        raise EmptyPortfolioError(f"{label} has no classified patents")
    return counts / total


def variety(v) -> int:
    return int(np.count_nonzero(_counts(v) > 0))


def _pair_terms(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    support = np.flatnonzero(p > 0)
    ps = p[support]
    terms = np.outer(ps, ps)
    np.fill_diagonal(terms, 0.0)
    return support, terms


def gini_simpson(p) -> float:
    """``1 - sum(p_i**2)``, accumulated as the sum of ``p_i * p_j`` over i != j."""
    p = np.asarray(p, dtype=float)
    _, terms = _pair_terms(p)
    return math.fsum(terms.ravel())


def rao_stirling(p, sim, codes: Sequence[str] | None = None) -> float:
    """Rao-Stirling diversity of the share vector ``p``.

    ``sim`` is either a :class:`ClassSimilarityMap` or a square cosine matrix.
    When ``codes`` is given, ``p`` is indexed by those class codes and looked
    up in the map by name (pairs absent from the map get cosine 0); otherwise
    ``p`` must follow the map's own class order.  The diagonal never
    contributes, whatever the stored self-similarity.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise ShapeError("share vector must be one-dimensional")
    support, terms = _pair_terms(p)

    if codes is not None:
        if len(codes) != len(p):
            raise ShapeError(f"{len(codes)} codes for a share vector of length {len(p)}")
        if not isinstance(sim, ClassSimilarityMap):
            raise TypeError("lookup by class code needs a ClassSimilarityMap")
        cos = sim.submatrix([codes[i] for i in support])
    else:
        values = sim.values if isinstance(sim, ClassSimilarityMap) else np.asarray(sim, dtype=float)
        if values.shape != (len(p), len(p)):
            raise ShapeError(f"similarity matrix {values.shape} does not match {len(p)} classes")
        cos = values[np.ix_(support, support)]
    return math.fsum((terms * (1.0 - cos)).ravel())


def true_diversity(delta: float) -> float:
    if not (0.0 <= delta < 1.0):
        raise DomainError(f"Rao-Stirling diversity must lie in [0, 1), got {delta}")
    return 1.0 / (1.0 - delta)


@dataclass(frozen=True)
class DiversityRecord:
    name: str
    n_patents: int
    variety: int
    gini_simpson: float
    rao_delta: float
    true_diversity: float

    FIELDS = ("name", "n_patents", "variety", "gini_simpson", "rao_delta", "true_diversity")


def diversity_record(vector, sim: ClassSimilarityMap, n_patents: int | None = None) -> DiversityRecord:
    """All diversity measures of a portfolio column against a base map."""
    p = proportions(vector)
    codes = getattr(vector, "codes", None)
    if codes is not None and tuple(codes) == sim.codes:
        codes = None
    delta = rao_stirling(p, sim, codes)
    if n_patents is None:
        n_patents = getattr(vector, "n_patents", None)
    return DiversityRecord(
        name=getattr(vector, "name", ""),
        n_patents=int(n_patents) if n_patents is not None else int(_counts(vector).sum()),
        variety=variety(vector),
        gini_simpson=gini_simpson(p),
        rao_delta=delta,
        true_diversity=true_diversity(delta),
    )


def round4(x: float) -> str:
    """Four decimals, round-half-even on the exact binary value."""
    return str(Decimal(x).quantize(Decimal("0.0001"), rounding=ROUND_HALF_EVEN))
