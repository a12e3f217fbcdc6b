"""Command line: ``patfolio run | compare | cohesion | query | export``.

Every failure exits nonzero with one line on stderr of the form
``<error-code>: <message>``.
"""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import json
import logging
import os
import shutil
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import export
from .compare import cosine_sim, distance_matrix, pearson, restricted_spearman, spearman
from .diversity import DiversityRecord, diversity_record, round4
from .errors import (
    DegenerateGraphError,
    InvalidSpecError,
    PortfolioError,
    StoreLockedError,
    UndefinedCorrelationError,
    UnknownNameError,
)
from .ingest import ParseStats, QuerySpec, build_search_string, filter_by_year, read_records
from .network import (
    SimilarityGraph,
    cohesion_report,
    cooccurrence,
    cosine_rows,
    largest_component,
    threshold_graph,
)
from .portfolio import (
    MatrixStore,
    RaoStore,
    append_column,
    append_diversity_row,
    check_append_column,
    check_append_row,
    count_classes,
    validate_name,
)
from .taxonomy import ClassSimilarityMap, derive_ipc3_codes, load_basemap

logger = logging.getLogger("patfolio")

MATRIX_FILE = "matrix.tsv"
RAO_FILE = "rao.tsv"
LOCK_FILE = ".patfolio.lock"


class UsageError(PortfolioError):
    code = "usage"


@dataclass
class RunConfig:
    set_name: str
    inputs: list[Path]
    basemap4: Path
    store_dir: Path
    layout4: Path | None = None
    basemap3: Path | None = None
    layout3: Path | None = None
    level: str = "ipc4"
    out_dir: Path | None = None
    year: int | None = None
    counting: str = "set"
    strict: bool = False
    threshold: float = 0.2

    def __post_init__(self):
        validate_name(self.set_name)
        if self.level not in ("ipc3", "ipc4"):
            raise UsageError(f"level must be ipc3 or ipc4, got {self.level!r}")
        if self.counting not in ("set", "multiset"):
            raise UsageError(f"counting must be 'set' or 'multiset', got {self.counting!r}")
        if not 0.0 <= float(self.threshold) <= 1.0:
            raise UsageError(f"threshold must lie in [0, 1], got {self.threshold}")
        if not self.inputs:
            raise UsageError("at least one input file is required")
        if self.level == "ipc3" and self.basemap3 is None:
            raise UsageError("level ipc3 needs a three-digit base map")
        for name in ("basemap4", "store_dir", "layout4", "basemap3", "layout3", "out_dir"):
            value = getattr(self, name)
            if value is not None:
                setattr(self, name, Path(value))
        self.inputs = [Path(p) for p in self.inputs]
        self.threshold = float(self.threshold)

    @property
    def output_dir(self) -> Path:
        return self.out_dir if self.out_dir is not None else self.store_dir / "runs" / self.set_name


@dataclass
class RunResult:
    record: DiversityRecord
    outputs: list[Path] = field(default_factory=list)
    parse_stats: ParseStats | None = None
    unknown: int = 0

    def summary(self) -> str:
        r = self.record
        return (
            f"{r.name}: n_patents={r.n_patents} variety={r.variety} "
            f"rao_delta={round4(r.rao_delta)} true_diversity={round4(r.true_diversity)}"
        )


@contextlib.contextmanager
def store_lock(store_dir: Path):
    """Exclusive lock on a store directory, held by an O_EXCL lock file."""
    store_dir.mkdir(parents=True, exist_ok=True)
    path = store_dir / LOCK_FILE
    try:
        fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise StoreLockedError(f"{store_dir} is locked by another run (remove {path} if stale)") from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        with contextlib.suppress(FileNotFoundError):
            path.unlink()


def _snapshot(paths: Sequence[Path]) -> dict[Path, bytes | None]:
    return {p: (p.read_bytes() if p.exists() else None) for p in paths}


def _restore(snapshot: dict[Path, bytes | None]) -> None:
    for path, data in snapshot.items():
        if data is None:
            with contextlib.suppress(FileNotFoundError):
                path.unlink()
        else:
            path.write_bytes(data)


def _load_map(matrix: Path | None, layout: Path | None) -> ClassSimilarityMap | None:
    if matrix is None:
        return None
    return load_basemap(matrix, layout)


def _write_level_files(out: Path, tag: str, records, codes, basemap, cfg: RunConfig, written: list[Path]):
    level = f"ipc{tag}"
    vec = count_classes(records, cfg.set_name, codes, level, multiset=cfg.counting == "multiset")
    written.append(export.write_pajek_vec(vec.counts, out / f"ipc{tag}.vec", len(codes)))
    if basemap is None or not basemap.has_layout:
        log = logger.info if basemap is None else logger.warning
        log("no %s layout; skipping vos%s.txt and ipc%s.clu", level, tag, tag)
        return
    written.append(export.write_pajek_clu(basemap.clusters, out / f"ipc{tag}.clu", len(basemap)))
    written += export.write_vosviewer(vec, basemap, out / f"vos{tag}.txt", out / f"vos{tag}n.txt", cfg.threshold)


def cmd_run(cfg: RunConfig) -> RunResult:
    """Parse, count, store and export one document set.

    Everything is computed and the name is checked against both stores
    before any file is written; the stores are updated last, and restored
    if that update fails part way.
    """
    basemap4 = load_basemap(cfg.basemap4, cfg.layout4)
    basemap3 = _load_map(cfg.basemap3, cfg.layout3)
    codes4 = basemap4.codes
    codes3 = basemap3.codes if basemap3 is not None else derive_ipc3_codes(codes4)
    basemap = basemap4 if cfg.level == "ipc4" else basemap3
    codes = codes4 if cfg.level == "ipc4" else codes3

    stats = ParseStats()
    records = read_records(cfg.inputs, stats)
    if cfg.year is not None:
        records = filter_by_year(records, cfg.year)

    vector = count_classes(
        records, cfg.set_name, codes, cfg.level, strict=cfg.strict, multiset=cfg.counting == "multiset"
    )
    record = diversity_record(vector, basemap, n_patents=len(records))
    cooc = cooccurrence(records, cfg.level, codes, cfg.strict)
    cosine = cosine_rows(cooc)

    with store_lock(cfg.store_dir):
        matrix = MatrixStore.open(cfg.store_dir / MATRIX_FILE, cfg.level, codes)
        rao = RaoStore.open(cfg.store_dir / RAO_FILE)
        check_append_column(matrix, vector)
        check_append_row(rao, record)

        out = cfg.output_dir
        out.parent.mkdir(parents=True, exist_ok=True)
        staging = Path(tempfile.mkdtemp(dir=out.parent, prefix=f".{out.name}."))
        try:
            written: list[Path] = []
            written.append(export.write_dl(cooc, staging / "coocc.dat"))
            written.append(export.write_pajek_net(cosine, staging / "cosine.net"))
            lcomp = largest_component(threshold_graph(cosine, cfg.threshold))
            written.append(export.write_pajek_net(lcomp, staging / "lcomp.net"))
            _write_level_files(staging, "4", records, codes4, basemap4, cfg, written)
            _write_level_files(staging, "3", records, codes3, basemap3, cfg, written)
            if out.exists():
                shutil.rmtree(out)
            os.replace(staging, out)
        except BaseException:
            shutil.rmtree(staging, ignore_errors=True)
            raise

        snapshot = _snapshot([matrix.path, rao.path])
        try:
            append_column(matrix, vector)
            append_diversity_row(rao, record)
        except BaseException:
            _restore(snapshot)
            shutil.rmtree(out, ignore_errors=True)
            raise

    outputs = [out / p.name for p in written]
    return RunResult(record, outputs, stats, vector.unknown)


# --- compare --------------------------------------------------------------


def _fmt(x, digits=3) -> str:
    if x is None:
        return "undefined"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{x:.{digits}f}"


def _safe(fn, *args):
    try:
        return fn(*args)
    except UndefinedCorrelationError:
        return None


def cmd_compare(store_dir: Path, names: Sequence[str], out_dir: Path | None = None, min_weight: float = 0.0):
    """Pairwise statistics over stored columns; writes the distance matrix and its network files."""
    store = MatrixStore.load(Path(store_dir) / MATRIX_FILE)
    names = list(names) or store.names
    if len(names) < 2:
        raise UsageError("compare needs at least two set names")
    unknown = [n for n in names if n not in store]
    if unknown:
        raise UnknownNameError(f"unknown set(s) {', '.join(unknown)}; valid names: {', '.join(store.names)}")

    lines = ["a\tb\tpearson\tspearman\tcosine\tspearman_both\tn_both"]
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            x, y = store.column(a), store.column(b)
            try:
                rs, size = restricted_spearman(x, y)
            except UndefinedCorrelationError as exc:
                rs, size = None, getattr(exc, "size", 0)
            lines.append("\t".join([
                a, b, _fmt(_safe(pearson, x, y)), _fmt(_safe(spearman, x, y)),
                _fmt(cosine_sim(x, y)), _fmt(rs), str(size),
            ]))

    dm = distance_matrix(store, names)
    out = Path(out_dir) if out_dir is not None else Path(store_dir) / "compare"
    export.write_distance_matrix(dm, out / "distance.tsv")
    graph = SimilarityGraph(dm.names, dm.similarity)
    export.write_pajek_net(graph, out / "cosine_sets.net")
    export.write_vosviewer_network(dm.names, dm.similarity, out / "sets_map.txt", out / "sets_net.txt", min_weight)
    return lines, dm


# --- cohesion -------------------------------------------------------------


def cmd_cohesion(inputs: Sequence[Path], level: str = "ipc4", basemap: Path | None = None, year: int | None = None):
    records = read_records(inputs)
    if year is not None:
        records = filter_by_year(records, year)
    codes = load_basemap(basemap).codes if basemap is not None else None
    if codes is not None and level == "ipc3":
        codes = derive_ipc3_codes(codes) if len(codes[0]) == 4 else codes
    m = cooccurrence(records, level, codes)
    if len(m) < 2:
        raise DegenerateGraphError(f"only {len(m)} occupied class(es); cohesion measures need at least 2")
    return cohesion_report(m)


def format_cohesion(report, name: str = "") -> list[str]:
    lines = [f"\tNetwork Cohesion Measures\t{name}".rstrip()]
    for k, (label, value) in enumerate(report.rows(), start=1):
        lines.append(f"{k}\t{label}\t{_fmt(value)}")
    return lines


# --- export ---------------------------------------------------------------


def cmd_export(store_dir: Path, name: str, basemap: Path, layout: Path | None, out_dir: Path, min_weight: float):
    """Re-export the Pajek vector and VOSviewer files of a stored column."""
    store = MatrixStore.load(Path(store_dir) / MATRIX_FILE)
    if name not in store:
        raise UnknownNameError(f"unknown set {name!r}; valid names: {', '.join(store.names)}")
    column = store.column(name)
    bm = load_basemap(basemap, layout)
    if bm.codes != store.codes:
        raise UsageError("base map classes differ from the store's class list")
    tag = store.level[-1]
    written = [export.write_pajek_vec(column.counts, Path(out_dir) / f"ipc{tag}.vec", len(bm))]
    if bm.has_layout:
        written.append(export.write_pajek_clu(bm.clusters, Path(out_dir) / f"ipc{tag}.clu", len(bm)))
        written += export.write_vosviewer(
            column, bm, Path(out_dir) / f"vos{tag}.txt", Path(out_dir) / f"vos{tag}n.txt", min_weight
        )
    return written


# --- argument parsing -----------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _query_spec(args) -> QuerySpec:
    groups = []
    for g in args.group or []:
        state, _, terms = g.partition("=")
        if not terms:
            raise InvalidSpecError(f"--group needs STATE=term1,term2, got {g!r}")
        groups.append((state.strip(), tuple(t.strip() for t in terms.split(","))))
    return QuerySpec(
        kind=args.kind,
        city_terms=tuple(args.term or ()),
        year=args.year,
        state=args.state,
        country=args.country,
        state_groups=tuple(groups),
    )


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="patfolio", description="Patent portfolio analysis of cities.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="add one document set to the stores and write its map files")
    r.add_argument("inputs", nargs="*", type=Path, help="record files (tagged or tab-separated)")
    r.add_argument("--config", type=Path, help="JSON run configuration; flags override it")
    r.add_argument("-n", "--name", dest="set_name", help="short set name (max 10 characters)")
    r.add_argument("--basemap4", type=Path)
    r.add_argument("--layout4", type=Path)
    r.add_argument("--basemap3", type=Path)
    r.add_argument("--layout3", type=Path)
    r.add_argument("--store", dest="store_dir", type=Path)
    r.add_argument("--out", dest="out_dir", type=Path)
    r.add_argument("--level", choices=["ipc3", "ipc4"])
    r.add_argument("--year", type=int)
    r.add_argument("--counting", choices=["set", "multiset"])
    r.add_argument("--strict", action="store_true", default=None)
    r.add_argument("--threshold", type=float)

    c = sub.add_parser("compare", help="correlations and distance matrix among stored sets")
    c.add_argument("names", nargs="*")
    c.add_argument("--store", type=Path, required=True)
    c.add_argument("--all", action="store_true", help="compare every stored set")
    c.add_argument("--out", type=Path)
    c.add_argument("--min-weight", type=float, default=0.0)

    h = sub.add_parser("cohesion", help="network cohesion measures of a set's co-occurrence graph")
    h.add_argument("inputs", nargs="+", type=Path)
    h.add_argument("--name", default="")
    h.add_argument("--level", choices=["ipc3", "ipc4"], default="ipc4")
    h.add_argument("--basemap", type=Path, help="restrict and order classes by this base map")
    h.add_argument("--year", type=int)
    h.add_argument("--json", action="store_true")

    q = sub.add_parser("query", help="print a USPTO advanced-search string")
    q.add_argument("--kind", choices=["city-country", "city-state", "cbsa"], required=True)
    q.add_argument("--term", action="append", help="place name (repeatable)")
    q.add_argument("--state")
    q.add_argument("--country")
    q.add_argument("--group", action="append", help="STATE=place1,place2 for multi-state areas")
    q.add_argument("--year", type=int, default=2014)

    e = sub.add_parser("export", help="re-export vector and VOSviewer files of a stored set")
    e.add_argument("name")
    e.add_argument("--store", type=Path, required=True)
    e.add_argument("--basemap", type=Path, required=True)
    e.add_argument("--layout", type=Path)
    e.add_argument("--out", type=Path, required=True)
    e.add_argument("--min-weight", type=float, default=0.2)
    return p


def run_config_from_args(args) -> RunConfig:
    values = {}
    if args.config is not None:
        values.update(json.loads(args.config.read_text(encoding="utf-8")))
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(values) - known
    if unknown:
        raise UsageError(f"unknown configuration keys: {', '.join(sorted(unknown))}")
    for name in known:
        flag = getattr(args, name, None)
        if name == "inputs":
            flag = flag or None
        if flag is not None:
            values[name] = flag
    missing = [k for k in ("set_name", "inputs", "basemap4", "store_dir") if k not in values]
    if missing:
        raise UsageError(f"missing required settings: {', '.join(missing)}")
    return RunConfig(**values)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
        if args.command == "run":
            result = cmd_run(run_config_from_args(args))
            print(result.summary())
        elif args.command == "compare":
            names = [] if args.all else args.names
            if not args.all and len(names) < 2:
                raise UsageError("compare needs at least two set names (or --all)")
            lines, _ = cmd_compare(args.store, names, args.out, args.min_weight)
            print("\n".join(lines))
        elif args.command == "cohesion":
            report = cmd_cohesion(args.inputs, args.level, args.basemap, args.year)
            if args.json:
                print(json.dumps(report.as_dict()))
            else:
                print("\n".join(format_cohesion(report, args.name)))
        elif args.command == "query":
            print(build_search_string(_query_spec(args)))
        elif args.command == "export":
            for path in cmd_export(args.store, args.name, args.basemap, args.layout, args.out, args.min_weight):
                print(path)
        return 0
    except UsageError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 2
    except PortfolioError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        code = "io-error" if isinstance(exc, OSError) else "invalid-input"
        print(f"{code}: {exc}".replace("\n", " "), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
