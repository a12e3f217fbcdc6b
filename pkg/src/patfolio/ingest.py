"""Patent record ingestion and USPTO advanced-search query composition.

Records are read from saved exports, never fetched over the network.  Two
input formats are accepted:

* the tagged format, one field per line and records separated by ``----``::

      PN US8000001
      ISD 20140107
      IC Toulouse||FR
      CL B64C 1/06
      ----

* a tab-separated table with header
  ``patent_id issue_date city region country class_symbols`` where the class
  symbols are joined with ``;``.  Rows repeating a patent id add inventor
  locations to the first row's record.
"""

from __future__ import annotations

import datetime as dt
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .errors import InvalidSpecError, ParseError

logger = logging.getLogger(__name__)

RECORD_SEPARATOR = "----"
TABLE_HEADER = ("patent_id", "issue_date", "city", "region", "country", "class_symbols")

_COUNTRY_RE = re.compile(r"^[A-Za-z]{2}$")


class Location(NamedTuple):
    city: str
    region: str | None
    country: str


@dataclass(frozen=True)
class PatentRecord:
    patent_id: str
    issue_date: dt.date
    inventor_locations: tuple[Location, ...] = ()
    class_symbols: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.patent_id:
            raise ValueError("patent_id must be non-empty")
        object.__setattr__(self, "inventor_locations", tuple(
            Location(loc.city, loc.region or None, _country(loc.country))
            for loc in self.inventor_locations
        ))
        object.__setattr__(self, "class_symbols", tuple(self.class_symbols))

    @property
    def year(self) -> int:
        return self.issue_date.year


def _country(code: str) -> str:
    if not _COUNTRY_RE.match(code or ""):
        raise ValueError(f"country code must be two letters, got {code!r}")
    return code.upper()


@dataclass
class ParseStats:
    records: int = 0
    unknown_tags: int = 0
    duplicates: int = 0


def _parse_date(value: str, line: int | None = None) -> dt.date:
    value = value.strip()
    for fmt in ("%Y%m%d", "%Y-%m-%d"):
        try:
            return dt.datetime.strptime(value, fmt).date()
        except ValueError:
            pass
    raise ParseError(f"invalid issue date {value!r}", line)


def _parse_location(value: str, line: int) -> Location:
    parts = value.split("|")
    if len(parts) != 3:
        raise ParseError(f"IC field needs city|region|country, got {value!r}", line)
    city, region, country = (p.strip() for p in parts)
    if not _COUNTRY_RE.match(country):
        raise ParseError(f"invalid country code {country!r}", line)
    return Location(city, region or None, country.upper())


def parse_records(text: str, stats: ParseStats | None = None) -> list[PatentRecord]:
    """Parse a tagged record stream.

    Unknown tags are skipped and counted in ``stats.unknown_tags``.  A block
    without a ``PN`` line raises :class:`ParseError` carrying the block's
    first line number (1-based).
    """
    stats = stats if stats is not None else ParseStats()
    records: list[PatentRecord] = []
    block: list[tuple[int, str, str]] = []

    def flush():
        if not block:
            return
        start = block[0][0]
        pn = isd = None
        locations, symbols = [], []
        for lineno, tag, value in block:
            if tag == "PN":
                if pn is not None:
                    raise ParseError("duplicate PN tag in record", lineno)
                if not value:
                    raise ParseError("empty PN value", lineno)
                pn = value
            elif tag == "ISD":
                isd = _parse_date(value, lineno)
            elif tag == "IC":
                locations.append(_parse_location(value, lineno))
            elif tag == "CL":
                if value:
                    symbols.append(value)
            else:
                stats.unknown_tags += 1
        if pn is None:
            raise ParseError("record block has no PN tag", start)
        if isd is None:
            raise ParseError(f"record {pn} has no ISD tag", start)
        records.append(PatentRecord(pn, isd, tuple(locations), tuple(symbols)))
        block.clear()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line == RECORD_SEPARATOR:
            flush()
            continue
        tag, _, value = line.partition(" ")
        block.append((lineno, tag.upper(), value.strip()))
    flush()

    if stats.unknown_tags:
        logger.warning("skipped %d lines with unknown tags", stats.unknown_tags)
    stats.records += len(records)
    return records


def parse_table(text: str, stats: ParseStats | None = None) -> list[PatentRecord]:
    """Parse the tab-separated tabular import."""
    stats = stats if stats is not None else ParseStats()
    lines = text.splitlines()
    if not lines:
        return []
    header = tuple(h.strip() for h in lines[0].split("\t"))
    if header != TABLE_HEADER:
        raise ParseError(f"expected header {' '.join(TABLE_HEADER)!r}", 1)

    order: list[str] = []
    rows: dict[str, dict] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        cells = raw.split("\t")
        if len(cells) != len(TABLE_HEADER):
            raise ParseError(f"expected {len(TABLE_HEADER)} columns, got {len(cells)}", lineno)
        pid, date, city, region, country, symbols = (c.strip() for c in cells)
        if not pid:
            raise ParseError("empty patent_id", lineno)
        if pid not in rows:
            order.append(pid)
            rows[pid] = {
                "date": _parse_date(date, lineno),
                "locations": [],
                "symbols": [s.strip() for s in symbols.split(";") if s.strip()],
            }
        if city or country:
            if not _COUNTRY_RE.match(country):
                raise ParseError(f"invalid country code {country!r}", lineno)
            rows[pid]["locations"].append(Location(city, region or None, country.upper()))

    records = [
        PatentRecord(pid, rows[pid]["date"], tuple(rows[pid]["locations"]), tuple(rows[pid]["symbols"]))
        for pid in order
    ]
    stats.records += len(records)
    return records


def read_records(paths: Iterable[str | Path], stats: ParseStats | None = None) -> list[PatentRecord]:
    """Read and concatenate several export files (download batches).

    The format is chosen per file: a first line equal to the table header
    selects the tabular reader, anything else the tagged reader.  Patent ids
    repeated across batches keep their first occurrence.
    """
    stats = stats if stats is not None else ParseStats()
    records: list[PatentRecord] = []
    for path in paths:
        text = Path(path).read_text(encoding="utf-8")
        first = text.split("\n", 1)[0].strip().split("\t")
        if tuple(first) == TABLE_HEADER:
            records.extend(parse_table(text, stats))
        else:
            records.extend(parse_records(text, stats))
    unique, dropped = dedup_records(records)
    stats.duplicates += dropped
    if dropped:
        logger.warning("dropped %d duplicate patent ids across batches", dropped)
    return unique


def dedup_records(records: Iterable[PatentRecord]) -> tuple[list[PatentRecord], int]:
    seen: set[str] = set()
    kept, dropped = [], 0
    for rec in records:
        if rec.patent_id in seen:
            dropped += 1
            continue
        seen.add(rec.patent_id)
        kept.append(rec)
    return kept, dropped


def filter_by_year(records: Iterable[PatentRecord], year: int) -> list[PatentRecord]:
    return [r for r in records if r.issue_date.year == year]


# --- search strings -------------------------------------------------------

QUERY_KINDS = ("city-country", "city-state", "cbsa")


@dataclass(frozen=True)
class QuerySpec:
    """Parameters of one USPTO advanced-search query.

    ``state_groups`` covers metropolitan areas spanning several states: each
    group is ``(state, terms)`` and is rendered as its own parenthesised
    clause.  When it is set, ``city_terms`` and ``state`` stay empty.
    """

    kind: str
    city_terms: tuple[str, ...] = ()
    year: int = 2014
    state: str | None = None
    country: str | None = None
    state_groups: tuple[tuple[str, tuple[str, ...]], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "city_terms", tuple(self.city_terms))
        object.__setattr__(
            self, "state_groups", tuple((s, tuple(t)) for s, t in self.state_groups)
        )
        self.validate()

    def validate(self):
        if self.kind not in QUERY_KINDS:
            raise InvalidSpecError(f"unknown query kind {self.kind!r}")
        if not (1000 <= int(self.year) <= 9999):
            raise InvalidSpecError(f"year must have four digits, got {self.year!r}")
        for code in filter(None, [self.state, self.country, *(s for s, _ in self.state_groups)]):
            if not _COUNTRY_RE.match(code):
                raise InvalidSpecError(f"state/country codes have two letters, got {code!r}")
        if self.kind == "city-country":
            if not self.country or self.state or self.state_groups:
                raise InvalidSpecError("city-country needs a country and no state")
        elif self.country:
            raise InvalidSpecError(f"{self.kind} takes a state, not a country")
        elif self.kind == "city-state" and (not self.state or self.state_groups):
            raise InvalidSpecError("city-state needs exactly one state")

        if self.state_groups:
            if self.kind != "cbsa" or self.state or self.city_terms:
                raise InvalidSpecError("state groups are only valid for cbsa queries")
            if any(not terms for _, terms in self.state_groups):
                raise InvalidSpecError("every state group needs at least one place name")
        else:
            if not self.city_terms:
                raise InvalidSpecError("city_terms must be non-empty")
            if self.kind == "cbsa" and not self.state:
                raise InvalidSpecError("cbsa needs a state or state groups")
        if any(not t.strip() for t in self.all_terms):
            raise InvalidSpecError("place names must be non-blank")

    @property
    def all_terms(self) -> tuple[str, ...]:
        if self.state_groups:
            return tuple(t for _, terms in self.state_groups for t in terms)
        return self.city_terms


def _quote(term: str) -> str:
    term = term.strip()
    if " " in term and not (term.startswith('"') and term.endswith('"')):
        return f'"{term}"'
    return term


def _ic_list(terms: Sequence[str]) -> str:
    quoted = [_quote(t) for t in terms]
    if len(quoted) == 1:
        return f"ic/{quoted[0]}"
    return "ic/(" + " OR ".join(quoted) + ")"


def build_search_string(spec: QuerySpec) -> str:
    """Render ``spec`` in USPTO advanced-search syntax.

    >>> build_search_string(QuerySpec("city-country", ["amsterdam"], 2014, country="nl"))
    'ic/amsterdam and icn/nl and isd/2014$$'
    """
    spec.validate()
    year = f"{int(spec.year):04d}"
    if spec.kind in ("city-country", "city-state"):
        terms = [f"ic/{_quote(t)}" for t in spec.city_terms]
        place = terms[0] if len(terms) == 1 else "(" + " or ".join(terms) + ")"
        if spec.kind == "city-country":
            where = f"icn/{spec.country.lower()}"
        else:
            where = f"is/{spec.state.lower()}"
        return f"{place} and {where} and isd/{year}$$"

    if spec.state_groups:
        clauses = [f"({_ic_list(terms)} AND IS/{state.upper()})" for state, terms in spec.state_groups]
        return " OR ".join(clauses) + f" AND ISD/{year}$$"
    return f"IS/{spec.state.upper()} and isd/{year}$$ and {_ic_list(spec.city_terms)}"
