"""IPC/CPC class normalization and the class base map.

CPC and IPC agree on the first four characters (section, two-digit class,
subclass letter), so every raw symbol is reduced to that prefix.  The base
map holds the canonical class list in file order, the symmetric cosine
matrix among classes, and optionally a layout (x, y, cluster) per class.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import FormatError, InvalidSymbolError, RangeError, ShapeError, UnknownClassError
from .fileio import format_real, write_text

logger = logging.getLogger(__name__)

Level = Literal["ipc3", "ipc4"]
LEVELS: tuple[str, ...] = ("ipc3", "ipc4")

IPC4_CLASS_COUNT = 630
UNKNOWN = "UNKNOWN"

_IPC4_RE = re.compile(r"^[A-Z][0-9]{2}[A-Z]$")
_RANGE_TOL = 1e-9


def normalize_class(raw: str, canonical: Iterable[str] | None = None) -> str:
    """Reduce a raw classification symbol to its four-character class.

    With ``canonical`` (strict mode) the class must also be a member of that
    list, otherwise :class:`UnknownClassError` is raised.
    """
    if raw is None or not raw.strip():
        raise InvalidSymbolError("empty classification symbol")
    code = raw.strip().upper()[:4]
    if not _IPC4_RE.match(code):
        raise InvalidSymbolError(f"not an IPC/CPC symbol: {raw!r}")
    if canonical is not None and code not in canonical:
        raise UnknownClassError(code)
    return code


def truncate3(ipc4: str) -> str:
    return ipc4[:3]


def check_level(level: str) -> str:
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
    return level


def at_level(ipc4: str, level: str) -> str:
    return ipc4 if check_level(level) == "ipc4" else truncate3(ipc4)


def derive_ipc3_codes(ipc4_codes: Iterable[str]) -> tuple[str, ...]:
    """Three-character classes in order of first appearance."""
    return tuple(dict.fromkeys(truncate3(c) for c in ipc4_codes))


@dataclass(frozen=True, eq=False)
class ClassSimilarityMap:
    codes: tuple[str, ...]
    values: np.ndarray
    coordinates: np.ndarray | None = None
    clusters: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "codes", tuple(self.codes))
        n = len(self.codes)
        if len(set(self.codes)) != n:
            raise FormatError("duplicate class codes in base map")
        values = np.array(self.values, dtype=float)
        if values.shape != (n, n):
            raise ShapeError(f"similarity matrix must be {n}x{n}, got {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.coordinates is not None:
            coords = np.array(self.coordinates, dtype=float).reshape(n, 2)
            coords.setflags(write=False)
            object.__setattr__(self, "coordinates", coords)
        if self.clusters is not None:
            clusters = np.array(self.clusters, dtype=np.int64).reshape(n)
            clusters.setflags(write=False)
            object.__setattr__(self, "clusters", clusters)
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(self.codes)})
        object.__setattr__(self, "_missing_logged", set())

    def __len__(self):
        return len(self.codes)

    def __contains__(self, code):
        return code in self._index

    @property
    def level(self) -> str:
        lengths = {len(c) for c in self.codes}
        return "ipc3" if lengths == {3} else "ipc4"

    @property
    def is_full(self) -> bool:
        return self.level == "ipc4" and len(self.codes) == IPC4_CLASS_COUNT

    @property
    def has_layout(self) -> bool:
        return self.coordinates is not None and self.clusters is not None

    def index(self, code: str) -> int:
        return self._index[code]

    def cosine(self, a: str, b: str) -> float:
        """Cosine between two classes; pairs missing from the map count as 0."""
        if a == b:
            return 1.0
        try:
            return float(self.values[self._index[a], self._index[b]])
        except KeyError:
            pair = (min(a, b), max(a, b))
            if pair not in self._missing_logged:
                self._missing_logged.add(pair)
                logger.warning("no base-map similarity for %s-%s; using cosine 0", *pair)
            return 0.0

    def submatrix(self, codes: Sequence[str]) -> np.ndarray:
        """Cosine matrix over ``codes``, which may include classes absent from the map."""
        idx = [self._index.get(c) for c in codes]
        if all(i is not None for i in idx):
            out = self.values[np.ix_(idx, idx)].copy()
        else:
            out = np.array([[self.cosine(a, b) for b in codes] for a in codes])
        np.fill_diagonal(out, 1.0)
        return out

    def disparity(self) -> np.ndarray:
        d = 1.0 - self.values
        np.fill_diagonal(d, 0.0)
        return d


def _read_matrix(path: Path) -> tuple[tuple[str, ...], np.ndarray]:
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise FormatError(f"{path}: empty base-map file")
    codes = tuple(c.strip() for c in lines[0].split("\t"))
    n = len(codes)
    rows = lines[1:]
    if len(rows) != n:
        raise FormatError(f"{path}: header declares {n} classes but found {len(rows)} rows")
    values = np.empty((n, n))
    for i, row in enumerate(rows):
        cells = row.split("\t")
        if len(cells) != n:
            raise FormatError(f"{path}: row {i + 2} has {len(cells)} values, expected {n}")
        try:
            values[i] = [float(c) for c in cells]
        except ValueError as exc:
            raise FormatError(f"{path}: row {i + 2}: {exc}") from None
    return codes, values


def _read_layout(path: Path, codes: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    layout = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        cells = line.split("\t")
        if len(cells) != 4:
            raise FormatError(f"{path}: line {lineno}: expected code, x, y, cluster")
        code, x, y, cluster = cells
        try:
            layout[code.strip()] = (float(x), float(y), int(cluster))
        except ValueError as exc:
            raise FormatError(f"{path}: line {lineno}: {exc}") from None
    if set(layout) != set(codes):
        missing = sorted(set(codes) - set(layout))
        extra = sorted(set(layout) - set(codes))
        raise FormatError(f"{path}: layout classes differ from matrix (missing {missing}, extra {extra})")
    coords = np.array([layout[c][:2] for c in codes], dtype=float).reshape(len(codes), 2)
    clusters = np.array([layout[c][2] for c in codes], dtype=np.int64)
    if (clusters < 1).any():
        raise FormatError(f"{path}: cluster numbers must be positive")
    return coords, clusters


def load_basemap(path: str | Path, layout_path: str | Path | None = None) -> ClassSimilarityMap:
    """Load a base map from its matrix file and optional layout file.

    Only the upper triangle (diagonal included) is read; the lower triangle
    is mirrored from it so the result is exactly symmetric.
    """
    path = Path(path)
    codes, values = _read_matrix(path)
    upper = np.triu(values)
    values = upper + np.triu(values, 1).T
    lo, hi = values.min(initial=0.0), values.max(initial=0.0)
    if lo < -_RANGE_TOL or hi > 1 + _RANGE_TOL:
        raise RangeError(f"{path}: cosine values must lie in [0, 1], found range [{lo}, {hi}]")
    values = np.clip(values, 0.0, 1.0)
    coords = clusters = None
    if layout_path is not None:
        coords, clusters = _read_layout(Path(layout_path), codes)
    return ClassSimilarityMap(codes, values, coords, clusters)


def write_basemap(sim: ClassSimilarityMap, path: str | Path, layout_path: str | Path | None = None):
    lines = ["\t".join(sim.codes)]
    lines += ["\t".join(format_real(v) for v in row) for row in sim.values]
    write_text(path, lines)
    if layout_path is not None:
        if not sim.has_layout:
            raise FormatError("base map has no layout to write")
        write_text(layout_path, [
            f"{c}\t{format_real(x)}\t{format_real(y)}\t{int(k)}"
            for c, (x, y), k in zip(sim.codes, sim.coordinates, sim.clusters)
        ])
