"""Class co-occurrence networks of a portfolio and their cohesion measures.

Nodes are the classes occupied by at least one patent of the set; two
classes are linked when some patent carries both.  The cohesion report
works on the binary version of that graph (any positive co-occurrence is an
edge) with unweighted geodesics.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass, fields
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .ingest import PatentRecord
from .portfolio import record_classes

COHESION_LABELS = (
    "Avg Degree",
    "Indeg H-Index",
    "Deg Centralization",
    "Out-Central",
    "In-Central",
    "Density",
    "Components",
    "Component Ratio",
    "Connectedness",
    "Fragmentation",
    "Closure",
    "Avg Distance",
    "SD Distance",
    "Diameter",
    "Breadth",
    "Compactness",
)


@dataclass(frozen=True, eq=False)
class CooccurrenceMatrix:
    codes: tuple[str, ...]
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.int64)
        n = len(self.codes)
        if w.shape != (n, n):
            raise ValueError(f"co-occurrence matrix must be {n}x{n}")
        if not np.array_equal(w, w.T) or np.any(np.diag(w) != 0) or (w < 0).any():
            raise ValueError("co-occurrence matrix must be symmetric, non-negative, zero diagonal")
        w.setflags(write=False)
        object.__setattr__(self, "codes", tuple(self.codes))
        object.__setattr__(self, "w", w)

    def __len__(self):
        return len(self.codes)


@dataclass(frozen=True, eq=False)
class SimilarityGraph:
    """Undirected weighted graph stored as a dense symmetric matrix; 0 means no edge."""

    nodes: tuple[str, ...]
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        n = len(self.nodes)
        if w.shape != (n, n):
            raise ValueError(f"weight matrix must be {n}x{n}")
        if not np.array_equal(w, w.T):
            raise ValueError("weight matrix must be symmetric")
        if np.any(np.diag(w) != 0):
            raise ValueError("self-loops are not allowed")
        if (w < 0).any():
            raise ValueError("weights must be non-negative")
        w.setflags(write=False)
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.nodes)

    def edges(self) -> list[tuple[int, int, float]]:
        """Edges as ``(i, j, weight)`` with ``i < j``, in row-major order."""
        i, j = np.nonzero(np.triu(self.weights, 1))
        return [(int(a), int(b), float(self.weights[a, b])) for a, b in zip(i, j)]

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.weights, 1)))

    def subgraph(self, idx: Sequence[int]) -> "SimilarityGraph":
        idx = list(idx)
        return SimilarityGraph(tuple(self.nodes[i] for i in idx), self.weights[np.ix_(idx, idx)])

    @classmethod
    def from_cooccurrence(cls, m: CooccurrenceMatrix) -> "SimilarityGraph":
        return cls(m.codes, m.w.astype(float))


def cooccurrence(
    records: Iterable[PatentRecord],
    level: str = "ipc4",
    codes: Sequence[str] | None = None,
    strict: bool = False,
) -> CooccurrenceMatrix:
    """Count, for every pair of classes, the patents carrying both.

    Node order follows ``codes`` (the canonical list, which also filters out
    unknown classes); without it the occupied classes are sorted.
    """
    canonical = {c: i for i, c in enumerate(codes)} if codes is not None else None
    per_patent = [record_classes(r, level, canonical, strict) for r in records]
    occupied = {c for classes in per_patent for c in classes}
    if canonical is not None:
        nodes = sorted(occupied, key=canonical.__getitem__)
    else:
        nodes = sorted(occupied)
    index = {c: i for i, c in enumerate(nodes)}
    w = np.zeros((len(nodes), len(nodes)), dtype=np.int64)
    for classes in per_patent:
        for a, b in combinations(classes, 2):
            i, j = index[a], index[b]
            w[i, j] += 1
            w[j, i] += 1
    return CooccurrenceMatrix(tuple(nodes), w)


def cosine_rows(m: CooccurrenceMatrix) -> SimilarityGraph:
    """Cosine between the co-occurrence profiles (rows) of every class pair."""
    w = m.w.astype(float)
    norms = np.sqrt(np.einsum("ij,ij->i", w, w))
    safe = np.where(norms > 0, norms, 1.0)
    cos = (w @ w.T) / np.outer(safe, safe)
    cos[norms == 0, :] = 0.0
    cos[:, norms == 0] = 0.0
    cos = np.clip(cos, 0.0, 1.0)
    cos = np.triu(cos, 1)
    return SimilarityGraph(m.codes, cos + cos.T)


def threshold_graph(g: SimilarityGraph, t: float) -> SimilarityGraph:
    """Keep edges with weight strictly greater than ``t``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {t}")
    w = np.where(g.weights > t, g.weights, 0.0)
    return SimilarityGraph(g.nodes, w)


def components(g: SimilarityGraph) -> list[list[int]]:
    """Connected components as sorted node-index lists, ordered by their smallest member."""
    if len(g) == 0:
        return []
    _, labels = connected_components(csr_matrix(g.weights > 0), directed=False)
    groups: dict[int, list[int]] = {}
    for node, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(node)
    return sorted(groups.values(), key=lambda members: members[0])


def largest_component(g: SimilarityGraph) -> SimilarityGraph:
    """Induced subgraph on the largest component.

    Among equally large components the one containing the earliest node in
    canonical order wins.
    """
    comps = components(g)
    if not comps:
        return g
    best = max(comps, key=lambda members: (len(members), -members[0]))
    return g.subgraph(best)


# --- cohesion -------------------------------------------------------------


@dataclass(frozen=True)
class CohesionReport:
    """Whole-network cohesion measures in the usual UCInet row order.

    ``None`` marks a measure that is undefined for the graph at hand (too few
    nodes, or no reachable pairs).
    """

    n: int
    avg_degree: float | None
    indeg_h_index: int
    deg_centralization: float | None
    out_central: float | None
    in_central: float | None
    density: float | None
    components: int
    component_ratio: float | None
    connectedness: float | None
    fragmentation: float | None
    closure: float | None
    avg_distance: float | None
    sd_distance: float | None
    diameter: int | None
    breadth: float | None
    compactness: float | None

    def values(self) -> tuple:
        return astuple(self)[1:]

    def rows(self) -> list[tuple[str, object]]:
        return list(zip(COHESION_LABELS, self.values()))

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def component_ratio(n_components: int, n: int) -> float:
    return (n_components - 1) / (n - 1)


def density_from_avg_degree(avg_degree: float, n: int) -> float:
    return avg_degree / (n - 1)


def h_index(values: Iterable[int]) -> int:
    ordered = sorted(values, reverse=True)
    h = 0
    for rank, v in enumerate(ordered, start=1):
        if v >= rank:
            h = rank
        else:
            break
    return h


def degree_centralization(degrees: np.ndarray) -> float | None:
    """Freeman centralization: ``sum(d_max - d_i) / ((n - 1)(n - 2))``."""
    n = len(degrees)
    if n < 3:
        return None
    return float((degrees.max() - degrees).sum()) / ((n - 1) * (n - 2))


def closure(adj: np.ndarray) -> float | None:
    """Global transitivity: three times the triangles over the connected triples."""
    if len(adj) < 3:
        return None
    a = adj.astype(np.int64)
    degrees = a.sum(axis=1)
    triples = int((degrees * (degrees - 1) // 2).sum())
    if triples == 0:
        return None
    triangles = int(np.trace(a @ a @ a)) // 6
    return 3 * triangles / triples


def cohesion_report(source) -> CohesionReport:
    """Cohesion measures of a co-occurrence matrix or graph, taken as binary."""
    weights = source.w if isinstance(source, CooccurrenceMatrix) else source.weights
    adj = np.asarray(weights) > 0
    n = len(adj)
    degrees = adj.sum(axis=1).astype(np.int64)
    n_edges = int(degrees.sum()) // 2

    if n == 0:
        return CohesionReport(0, None, 0, None, None, None, None, 0, None, None, None, None,
                              None, None, None, None, None)

    n_comp = len(components(SimilarityGraph(tuple(map(str, range(n))), adj.astype(float))))
    central = degree_centralization(degrees)

    if n < 2:
        return CohesionReport(n, 0.0, h_index(degrees), central, central, central, None, n_comp,
                              None, None, None, closure(adj), None, None, None, None, None)

    pairs = n * (n - 1)
    density = 2 * n_edges / pairs
    avg_degree = density * (n - 1)

    dist = shortest_path(csr_matrix(adj.astype(float)), method="D", unweighted=True, directed=False)
    off = ~np.eye(n, dtype=bool)
    finite = np.isfinite(dist) & off
    reach = int(finite.sum())
    connectedness = reach / pairs
    compactness = float((1.0 / dist[finite]).sum()) / pairs if reach else 0.0

    if reach:
        geo = dist[finite]
        avg_distance = float(geo.mean())
        sd_distance = float(geo.std())
        diameter = int(geo.max())
    else:
        avg_distance = sd_distance = diameter = None

    return CohesionReport(
        n=n,
        avg_degree=avg_degree,
        indeg_h_index=h_index(degrees),
        deg_centralization=central,
        out_central=central,
        in_central=central,
        density=density,
        components=n_comp,
        component_ratio=component_ratio(n_comp, n),
        connectedness=connectedness,
        fragmentation=1.0 - connectedness,
        closure=closure(adj),
        avg_distance=avg_distance,
        sd_distance=sd_distance,
        diameter=diameter,
        breadth=1.0 - compactness,
        compactness=compactness,
    )
