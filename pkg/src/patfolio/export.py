"""Writers (and matching readers) for every file a run produces.

All output is UTF-8 without BOM, ``\\n`` line endings, written atomically.
Integers are printed bare; reals use the shortest round-trip representation,
capped at six significant digits for network edge weights.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .compare import PortfolioDistanceMatrix
from .errors import FormatError, ShapeError, UnknownClassError
from .fileio import format_number, format_real, write_text
from .ingest import RECORD_SEPARATOR, PatentRecord, parse_records
from .network import CooccurrenceMatrix, SimilarityGraph
from .taxonomy import ClassSimilarityMap

EDGE_DIGITS = 6


def _label(label: str) -> str:
    if '"' in label or "\n" in label:
        raise FormatError(f"label cannot contain quotes or newlines: {label!r}")
    return f'"{label}"'


def _weight(w) -> str:
    w = float(w)
    return format_number(int(w) if w.is_integer() else w, EDGE_DIGITS)


# --- Pajek ----------------------------------------------------------------


def pajek_net_lines(g: SimilarityGraph) -> list[str]:
    lines = [f"*Vertices {len(g)}"]
    lines += [f"{i} {_label(label)}" for i, label in enumerate(g.nodes, start=1)]
    lines.append("*Edges")
    lines += [f"{i + 1} {j + 1} {_weight(w)}" for i, j, w in g.edges()]
    return lines


def write_pajek_net(g: SimilarityGraph, path: str | Path) -> Path:
    return write_text(path, pajek_net_lines(g))


def read_pajek_net(path: str | Path) -> SimilarityGraph:
    lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines or not lines[0].lower().startswith("*vertices"):
        raise FormatError(f"{path}: Pajek network must start with *Vertices")
    n = int(lines[0].split()[1])
    labels = []
    for line in lines[1 : n + 1]:
        num, _, rest = line.partition(" ")
        if int(num) != len(labels) + 1:
            raise FormatError(f"{path}: vertex numbers must run 1..{n}")
        labels.append(rest.strip().strip('"'))
    if len(lines) <= n or lines[n + 1].lower() != "*edges":
        raise FormatError(f"{path}: expected *Edges after {n} vertices")
    w = np.zeros((n, n))
    for line in lines[n + 2 :]:
        a, b, val = line.split()[:3]
        i, j = int(a) - 1, int(b) - 1
        w[i, j] = w[j, i] = float(val)
    return SimilarityGraph(tuple(labels), w)


def write_pajek_vec(values: Sequence[float], path: str | Path, n_classes: int | None = None) -> Path:
    values = list(values)
    if n_classes is not None and len(values) != n_classes:
        raise ShapeError(f"vector has {len(values)} entries, base map has {n_classes} classes")
    return write_text(path, [f"*Vertices {len(values)}", *(format_number(_scalar(v)) for v in values)])


def write_pajek_clu(clusters: Sequence[int], path: str | Path, n_classes: int | None = None) -> Path:
    clusters = [int(c) for c in clusters]
    if n_classes is not None and len(clusters) != n_classes:
        raise ShapeError(f"partition has {len(clusters)} entries, base map has {n_classes} classes")
    return write_text(path, [f"*Vertices {len(clusters)}", *(str(c) for c in clusters)])


def _scalar(v):
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(v)


def _read_vertices_column(path) -> list[str]:
    lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines or not lines[0].lower().startswith("*vertices"):
        raise FormatError(f"{path}: expected *Vertices header")
    n = int(lines[0].split()[1])
    if len(lines) - 1 != n:
        raise FormatError(f"{path}: header declares {n} vertices, found {len(lines) - 1} values")
    return lines[1:]


def read_pajek_vec(path: str | Path) -> np.ndarray:
    return np.array([float(v) for v in _read_vertices_column(path)])


def read_pajek_clu(path: str | Path) -> np.ndarray:
    return np.array([int(v) for v in _read_vertices_column(path)], dtype=np.int64)


# --- UCInet DL (raw co-occurrence) ----------------------------------------


def write_dl(m: CooccurrenceMatrix, path: str | Path) -> Path:
    lines = [f"dl n={len(m)}", "format = fullmatrix", "labels:", ",".join(m.codes), "data:"]
    lines += [" ".join(str(int(v)) for v in row) for row in m.w]
    return write_text(path, lines)


def read_dl(path: str | Path) -> CooccurrenceMatrix:
    lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
    try:
        n = int(lines[0].split("=")[1])
        labels_at = lines.index("labels:")
        data_at = lines.index("data:")
    except (IndexError, ValueError):
        raise FormatError(f"{path}: not a UCInet DL full-matrix file") from None
    codes = tuple(c for c in lines[labels_at + 1].split(",") if c) if n else ()
    rows = [[int(v) for v in ln.split()] for ln in lines[data_at + 1 : data_at + 1 + n]]
    return CooccurrenceMatrix(codes, np.array(rows, dtype=np.int64).reshape(n, n))


# --- VOSviewer ------------------------------------------------------------

VOS_MAP_HEADER = "id\tlabel\tx\ty\tcluster\tweight"


def vosviewer_lines(portfolio, basemap: ClassSimilarityMap, min_weight: float = 0.0) -> tuple[list[str], list[str]]:
    if not basemap.has_layout:
        raise FormatError("base map has no layout (coordinates and clusters)")
    level = getattr(portfolio, "level", basemap.level)
    if level != basemap.level:
        raise ShapeError(f"portfolio is {level} but base map is {basemap.level}")
    occupied = [(code, int(n)) for code, n in zip(portfolio.codes, portfolio.counts) if n > 0]
    for code, _ in occupied:
        if code not in basemap:
            raise UnknownClassError(code)

    map_lines = [VOS_MAP_HEADER]
    for vid, (code, count) in enumerate(occupied, start=1):
        k = basemap.index(code)
        x, y = basemap.coordinates[k]
        map_lines.append(f"{vid}\t{code}\t{format_real(x)}\t{format_real(y)}\t{int(basemap.clusters[k])}\t{count}")

    net_lines = []
    for a in range(len(occupied)):
        for b in range(a + 1, len(occupied)):
            c = basemap.cosine(occupied[a][0], occupied[b][0])
            if c > min_weight:
                net_lines.append(f"{a + 1}\t{b + 1}\t{_weight(c)}")
    return map_lines, net_lines


def write_vosviewer(portfolio, basemap: ClassSimilarityMap, path_map, path_net, min_weight: float = 0.0):
    """Overlay map of the occupied classes on the base map plus their cosine links."""
    map_lines, net_lines = vosviewer_lines(portfolio, basemap, min_weight)
    write_text(path_map, map_lines)
    write_text(path_net, net_lines)
    return Path(path_map), Path(path_net)


def write_vosviewer_network(names: Sequence[str], weights: np.ndarray, path_map, path_net, min_weight: float = 0.0):
    """Map without layout (VOSviewer computes one) for an arbitrary weighted network."""
    weights = np.asarray(weights, dtype=float)
    map_lines = ["id\tlabel"] + [f"{i}\t{name}" for i, name in enumerate(names, start=1)]
    net_lines = [
        f"{i + 1}\t{j + 1}\t{_weight(weights[i, j])}"
        for i in range(len(names))
        for j in range(i + 1, len(names))
        if weights[i, j] > min_weight
    ]
    write_text(path_map, map_lines)
    write_text(path_net, net_lines)
    return Path(path_map), Path(path_net)


def read_vosviewer_map(path: str | Path) -> list[dict]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = lines[0].split("\t")
    return [dict(zip(header, ln.split("\t"))) for ln in lines[1:] if ln]


# --- records and distance matrices ---------------------------------------


def _field(value: str, what: str) -> str:
    if value != value.strip() or "\n" in value or "\r" in value:
        raise FormatError(f"{what} cannot have surrounding whitespace or newlines: {value!r}")
    return value


def record_lines(records: Iterable[PatentRecord]) -> list[str]:
    lines: list[str] = []
    for k, rec in enumerate(records):
        if k:
            lines.append(RECORD_SEPARATOR)
        lines.append(f"PN {_field(rec.patent_id, 'patent id')}")
        lines.append(f"ISD {rec.issue_date:%Y%m%d}")
        for loc in rec.inventor_locations:
            parts = [loc.city, loc.region or "", loc.country]
            if any("|" in p for p in parts):
                raise FormatError(f"location fields cannot contain '|': {loc}")
            lines.append("IC " + "|".join(_field(p, "location") for p in parts))
        for sym in rec.class_symbols:
            if not sym:
                raise FormatError("class symbols must be non-empty")
            lines.append(f"CL {_field(sym, 'class symbol')}")
    return lines


def write_records(records: Iterable[PatentRecord], path: str | Path) -> Path:
    return write_text(path, record_lines(records))


def read_records_file(path: str | Path) -> list[PatentRecord]:
    return parse_records(Path(path).read_text(encoding="utf-8"))


def write_distance_matrix(dm: PortfolioDistanceMatrix, path: str | Path) -> Path:
    lines = ["\t".join(["", *dm.names])]
    lines += ["\t".join([name, *(format_real(v) for v in row)]) for name, row in zip(dm.names, dm.d)]
    return write_text(path, lines)


def read_distance_matrix(path: str | Path) -> PortfolioDistanceMatrix:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln]
    names = tuple(lines[0].split("\t")[1:])
    d = np.array([[float(v) for v in ln.split("\t")[1:]] for ln in lines[1:]]).reshape(len(names), len(names))
    return PortfolioDistanceMatrix(names, d)
