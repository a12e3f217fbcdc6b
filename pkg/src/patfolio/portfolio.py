"""Class-count vectors and the incremental matrix and diversity stores.

The matrix store has one row per canonical class and gains one column per
run; the diversity ("rao") store gains one row per run.  Both are plain
tab-separated text rewritten atomically on every append, so a rejected
append leaves the file untouched.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .diversity import DiversityRecord
from .errors import (
    FormatError,
    InvalidNameError,
    InvalidSymbolError,
    LevelConflictError,
    NameConflictError,
    UnknownClassError,
)
from .fileio import format_real, write_text
from .ingest import PatentRecord
from .taxonomy import at_level, check_level, normalize_class

logger = logging.getLogger(__name__)

MAX_NAME_LENGTH = 10
_NAME_RE = re.compile(r'^[^\s"/\\]+$')

RAO_HEADER = DiversityRecord.FIELDS


def validate_name(name: str) -> str:
    if not name or len(name) > MAX_NAME_LENGTH:
        raise InvalidNameError(f"set name must have 1 to {MAX_NAME_LENGTH} characters, got {name!r}")
    if not _NAME_RE.match(name):
        raise InvalidNameError(f"set name may not contain whitespace, quotes or slashes: {name!r}")
    return name


@dataclass(frozen=True, eq=False)
class ClassVector:
    """Counts of one document set over the canonical classes of a level."""

    name: str
    codes: tuple[str, ...]
    counts: np.ndarray
    level: str = "ipc4"
    n_patents: int | None = None
    unknown: int = 0
    unknown_symbols: tuple[str, ...] = ()

    def __post_init__(self):
        validate_name(self.name)
        check_level(self.level)
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (len(self.codes),):
            raise ValueError(f"{len(self.codes)} codes but counts of shape {counts.shape}")
        if (counts < 0).any():
            raise ValueError("counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "codes", tuple(self.codes))
        object.__setattr__(self, "counts", counts)

    def __eq__(self, other):
        if not isinstance(other, ClassVector):
            return NotImplemented
        return (self.name, self.codes, self.level) == (other.name, other.codes, other.level) and bool(
            np.array_equal(self.counts, other.counts)
        )

    def as_dict(self) -> dict[str, int]:
        return {c: int(n) for c, n in zip(self.codes, self.counts) if n}

    def rename(self, name: str) -> "ClassVector":
        return replace(self, name=name)


def classify_symbol(
    raw: str,
    level: str,
    canonical: Sequence[str] | set[str] | dict | None = None,
    strict: bool = False,
    unknown: list[str] | None = None,
) -> str | None:
    """Class of one raw symbol at ``level``, or None when it is routed to UNKNOWN.

    Symbols that fail validation or fall outside ``canonical`` raise in
    strict mode; otherwise they are appended to ``unknown``.
    """
    try:
        code = at_level(normalize_class(raw), level)
    except InvalidSymbolError:
        if strict:
            raise
        if unknown is not None:
            unknown.append(raw)
        return None
    if canonical is not None and code not in canonical:
        if strict:
            raise UnknownClassError(code)
        if unknown is not None:
            unknown.append(code)
        return None
    return code


def record_classes(record: PatentRecord, level: str, canonical=None, strict=False, unknown=None) -> list[str]:
    """Distinct classes of one patent at ``level``, in order of appearance."""
    found = (classify_symbol(raw, level, canonical, strict, unknown) for raw in record.class_symbols)
    return list(dict.fromkeys(c for c in found if c is not None))


def count_classes(
    records: Iterable[PatentRecord],
    name: str,
    codes: Sequence[str],
    level: str = "ipc4",
    *,
    strict: bool = False,
    multiset: bool = False,
) -> ClassVector:
    """Count patents per class.

    By default each distinct class of a patent adds exactly one; with
    ``multiset=True`` every symbol adds one, so a patent listing three
    G06F subgroups contributes 3 to G06F.  Classes outside ``codes`` go to
    the unknown bucket (or raise, when ``strict``).
    """
    check_level(level)
    index = {c: i for i, c in enumerate(codes)}
    counts = np.zeros(len(codes), dtype=np.int64)
    unknown: list[str] = []
    n = 0
    for rec in records:
        n += 1
        if multiset:
            found = [classify_symbol(raw, level, index, strict, unknown) for raw in rec.class_symbols]
            found = [c for c in found if c is not None]
        else:
            found = record_classes(rec, level, index, strict, unknown)
        for code in found:
            counts[index[code]] += 1
    if unknown:
        logger.warning("%s: %d symbols outside the class list counted as UNKNOWN", name, len(unknown))
    return ClassVector(
        name=name,
        codes=tuple(codes),
        counts=counts,
        level=level,
        n_patents=n,
        unknown=len(unknown),
        unknown_symbols=tuple(sorted(set(unknown))),
    )


# --- matrix store ---------------------------------------------------------


@dataclass(frozen=True)
class MatrixStore:
    level: str
    codes: tuple[str, ...]
    columns: tuple[ClassVector, ...] = ()
    path: Path | None = field(default=None, compare=False)

    def __post_init__(self):
        check_level(self.level)
        object.__setattr__(self, "codes", tuple(self.codes))
        object.__setattr__(self, "columns", tuple(self.columns))
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise NameConflictError("duplicate column names in matrix store")
        if any(c.level != self.level or c.codes != self.codes for c in self.columns):
            raise LevelConflictError("all columns must share the store's level and class list")

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def __contains__(self, name):
        return name in self.names

    def column(self, name: str) -> ClassVector:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_array(self) -> np.ndarray:
        if not self.columns:
            return np.zeros((len(self.codes), 0), dtype=np.int64)
        return np.column_stack([c.counts for c in self.columns])

    def lines(self) -> list[str]:
        out = ["\t".join(["class", *self.names])]
        data = self.as_array()
        for i, code in enumerate(self.codes):
            out.append("\t".join([code, *(str(int(v)) for v in data[i])]))
        return out

    def save(self, path: str | Path | None = None) -> Path:
        path = Path(path or self.path)
        return write_text(path, self.lines())

    @classmethod
    def load(cls, path: str | Path) -> "MatrixStore":
        path = Path(path)
        lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln]
        if not lines or lines[0].split("\t")[0] != "class":
            raise FormatError(f"{path}: matrix store must start with a 'class' header")
        names = lines[0].split("\t")[1:]
        codes, rows = [], []
        for lineno, line in enumerate(lines[1:], start=2):
            cells = line.split("\t")
            if len(cells) != len(names) + 1:
                raise FormatError(f"{path}: line {lineno} has {len(cells)} cells, expected {len(names) + 1}")
            codes.append(cells[0])
            try:
                rows.append([int(v) for v in cells[1:]])
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno}: {exc}") from None
        level = "ipc3" if codes and all(len(c) == 3 for c in codes) else "ipc4"
        data = np.array(rows, dtype=np.int64).reshape(len(codes), len(names))
        columns = [ClassVector(n, tuple(codes), data[:, j], level) for j, n in enumerate(names)]
        return cls(level, tuple(codes), tuple(columns), path)

    @classmethod
    def open(cls, path: str | Path, level: str, codes: Sequence[str]) -> "MatrixStore":
        """Load the store at ``path``, or start an empty one if it is absent."""
        path = Path(path)
        if path.exists():
            store = cls.load(path)
            if store.level != level or store.codes != tuple(codes):
                raise LevelConflictError(f"{path}: store holds {store.level} over {len(store.codes)} classes")
            return store
        return cls(level, tuple(codes), (), path)


def check_append_column(store: MatrixStore, v: ClassVector) -> None:
    if v.level != store.level:
        raise LevelConflictError(f"column {v.name!r} is {v.level}, store is {store.level}")
    if v.codes != store.codes:
        raise LevelConflictError(f"column {v.name!r} uses a different class list than the store")
    if v.name in store:
        raise NameConflictError(f"set {v.name!r} already exists in the matrix store")


def append_column(store: MatrixStore, v: ClassVector) -> MatrixStore:
    check_append_column(store, v)
    new = replace(store, columns=store.columns + (v,))
    if store.path is not None:
        new.save()
    return new


# --- rao store ------------------------------------------------------------


@dataclass(frozen=True)
class RaoStore:
    rows: tuple[DiversityRecord, ...] = ()
    path: Path | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        names = [r.name for r in self.rows]
        if len(set(names)) != len(names):
            raise NameConflictError("duplicate row names in rao store")

    @property
    def names(self) -> list[str]:
        return [r.name for r in self.rows]

    def __contains__(self, name):
        return name in self.names

    def row(self, name: str) -> DiversityRecord:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def lines(self) -> list[str]:
        out = ["\t".join(RAO_HEADER)]
        for r in self.rows:
            out.append("\t".join([
                r.name, str(r.n_patents), str(r.variety),
                format_real(r.gini_simpson), format_real(r.rao_delta), format_real(r.true_diversity),
            ]))
        return out

    def save(self, path: str | Path | None = None) -> Path:
        return write_text(Path(path or self.path), self.lines())

    @classmethod
    def load(cls, path: str | Path) -> "RaoStore":
        path = Path(path)
        lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln]
        if not lines or tuple(lines[0].split("\t")) != RAO_HEADER:
            raise FormatError(f"{path}: rao store header must be {' '.join(RAO_HEADER)!r}")
        rows = []
        for lineno, line in enumerate(lines[1:], start=2):
            cells = line.split("\t")
            if len(cells) != len(RAO_HEADER):
                raise FormatError(f"{path}: line {lineno} has {len(cells)} cells")
            try:
                rows.append(DiversityRecord(
                    cells[0], int(cells[1]), int(cells[2]), float(cells[3]), float(cells[4]), float(cells[5])
                ))
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno}: {exc}") from None
        return cls(tuple(rows), path)

    @classmethod
    def open(cls, path: str | Path) -> "RaoStore":
        path = Path(path)
        return cls.load(path) if path.exists() else cls((), path)


def check_append_row(store: RaoStore, rec: DiversityRecord) -> None:
    validate_name(rec.name)
    if rec.name in store:
        raise NameConflictError(f"set {rec.name!r} already exists in the rao store")


def append_diversity_row(store: RaoStore, rec: DiversityRecord) -> RaoStore:
    check_append_row(store, rec)
    new = replace(store, rows=store.rows + (rec,))
    if store.path is not None:
        new.save()
    return new
