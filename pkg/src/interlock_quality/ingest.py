"""Typed loading of company, affiliation, aggregate and indicator tables.

All inputs are UTF-8, comma-delimited files with a header row. A column
mapping (canonical field name -> header name in the file) isolates callers
from schema drift between registers; fields not in the mapping are looked up
under their canonical name.
"""

from __future__ import annotations

import csv
import logging
import math
import os
import re
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .exceptions import DuplicateKey, IngestError, IOFailure, SchemaMismatch

logger = logging.getLogger(__name__)

COMPANY_FIELDS = ("firm_id", "country", "revenue_usd", "employees", "guo_id", "market_cap_usd")
AFFILIATION_FIELDS = ("director_id", "firm_id", "role")
AGGREGATE_FIELDS = ("country", "firm_count", "total_revenue_usd")

# Employee bands used by the size-class coverage comparison: label, inclusive low, exclusive high.
SIZE_BANDS: tuple[tuple[str, int, float], ...] = (
    ("<10", 0, 10),
    ("10-19", 10, 20),
    ("20-49", 20, 50),
    ("50-249", 50, 250),
    (">=250", 250, math.inf),
)
# Column names for the optional per-band counts in an aggregates file.
SIZE_BAND_COLUMNS = {
    "<10": "size_lt10",
    "10-19": "size_10_19",
    "20-49": "size_20_49",
    "50-249": "size_50_249",
    ">=250": "size_ge250",
}

_ISO2 = re.compile(r"^[A-Z]{2}$")


class MalformedValue(IngestError):
    pass


def size_band(employees: int) -> str:
    for label, lo, hi in SIZE_BANDS:
        if lo <= employees < hi:
            return label
    raise ValueError(f"negative employee count {employees}")


@dataclass(frozen=True)
class CompanyRecord:
    firm_id: str
    country: str
    revenue_usd: float | None = None
    employees: int | None = None
    guo_id: str | None = None
    market_cap_usd: float | None = None


@dataclass(frozen=True, order=True)
class AffiliationRecord:
    director_id: str
    firm_id: str
    role: str | None = None


@dataclass(frozen=True)
class AffiliationTable:
    companies: Mapping[str, CompanyRecord]
    positions: tuple[AffiliationRecord, ...] = ()
    # ingestion tallies, not part of table identity
    rejected_lines: tuple[int, ...] = field(default=(), compare=False)
    dangling_positions: int = field(default=0, compare=False)
    duplicate_positions: int = field(default=0, compare=False)

    def boards(self) -> dict[str, frozenset[str]]:
        """Map every firm to its (possibly empty) set of directors."""
        out: dict[str, set[str]] = {fid: set() for fid in self.companies}
        for pos in self.positions:
            out[pos.firm_id].add(pos.director_id)
        return {fid: frozenset(ds) for fid, ds in out.items()}

    def director_index(self) -> dict[str, list[str]]:
        """Inverted index director -> sorted firm ids."""
        idx: dict[str, set[str]] = defaultdict(set)
        for pos in self.positions:
            idx[pos.director_id].add(pos.firm_id)
        return {d: sorted(fs) for d, fs in sorted(idx.items())}

    def filter_country(self, country: str | None) -> "AffiliationTable":
        if country is None:
            return self
        companies = {k: c for k, c in self.companies.items() if c.country == country}
        positions = tuple(p for p in self.positions if p.firm_id in companies)
        return AffiliationTable(companies, positions)


@dataclass(frozen=True)
class CountryAggregate:
    country: str
    firm_count: int
    total_revenue_usd: float | None = None
    size_class_counts: Mapping[str, int] | None = None

    def __post_init__(self):
        if self.firm_count < 1:
            raise ValueError(f"{self.country}: firm_count must be >= 1")
        if self.total_revenue_usd is not None and not self.total_revenue_usd > 0:
            raise ValueError(f"{self.country}: total_revenue_usd must be positive")
        if self.size_class_counts is not None and sum(self.size_class_counts.values()) > self.firm_count:
            raise ValueError(f"{self.country}: size-class counts exceed firm_count")

    @property
    def mean_revenue_usd(self) -> float | None:
        if self.total_revenue_usd is None:
            return None
        return self.total_revenue_usd / self.firm_count


@dataclass(frozen=True)
class IndicatorTable:
    rows: Mapping[str, Mapping[str, float | None]]
    log_flags: frozenset[str] = frozenset()

    @property
    def codes(self) -> list[str]:
        codes: set[str] = set()
        for row in self.rows.values():
            codes.update(row)
        return sorted(codes)

    @property
    def countries(self) -> list[str]:
        return sorted(self.rows)

    def matrix(self, codes: Iterable[str] | None = None, countries: Iterable[str] | None = None):
        """Return ``(countries, codes, X)`` with NaN for missing values."""
        import numpy as np

        codes = list(self.codes if codes is None else codes)
        countries = list(self.countries if countries is None else countries)
        X = np.full((len(countries), len(codes)), np.nan)
        for i, c in enumerate(countries):
            row = self.rows.get(c, {})
            for j, code in enumerate(codes):
                v = row.get(code)
                if v is not None:
                    X[i, j] = v
        return countries, codes, X


# -- low-level reading -------------------------------------------------------

def _open_rows(path, mapping: Mapping[str, str] | None, required: Iterable[str], optional: Iterable[str]):
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc.strerror or exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path}: empty file, no header row") from None
        header = [h.strip() for h in header]
        mapping = dict(mapping or {})
        columns: dict[str, int] = {}
        for name in required:
            col = mapping.get(name, name)
            if col not in header:
                raise SchemaMismatch(f"{path}: missing column {col!r} (for field {name!r})")
            columns[name] = header.index(col)
        for name in optional:
            col = mapping.get(name, name)
            if col in header:
                columns[name] = header.index(col)
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if not raw or all(not cell.strip() for cell in raw):
                continue
            values = {name: (raw[i].strip() if i < len(raw) else "") for name, i in columns.items()}
            rows.append((lineno, values))
    return header, rows


def _opt_float(text: str, what: str, path, lineno: int) -> float | None:
    if text == "":
        return None
    try:
        value = float(text)
    except ValueError:
        raise MalformedValue(f"{path}:{lineno}: {what} {text!r} is not a number") from None
    if not math.isfinite(value) or value < 0:
        raise MalformedValue(f"{path}:{lineno}: {what} must be finite and nonnegative, got {text!r}")
    return value


def _opt_int(text: str, what: str, path, lineno: int) -> int | None:
    if text == "":
        return None
    try:
        value = int(text)
    except ValueError:
        try:
            as_float = float(text)
        except ValueError:
            raise MalformedValue(f"{path}:{lineno}: {what} {text!r} is not an integer") from None
        if not as_float.is_integer():
            raise MalformedValue(f"{path}:{lineno}: {what} {text!r} is not an integer")
        value = int(as_float)
    if value < 0:
        raise MalformedValue(f"{path}:{lineno}: {what} must be nonnegative, got {text!r}")
    return value


# -- public parsers ------------------------------------------------------------

def parse_companies(path, mapping: Mapping[str, str] | None = None, *, lenient: bool = False) -> AffiliationTable:
    """Load a companies file into a table with no positions yet.

    Rows with an empty ``firm_id`` are rejected and their line numbers kept in
    ``rejected_lines``. A repeated ``firm_id`` raises :class:`DuplicateKey`
    unless ``lenient`` is set, in which case the last occurrence wins.
    """
    _, rows = _open_rows(path, mapping, ("firm_id", "country"), COMPANY_FIELDS[2:])
    companies: dict[str, CompanyRecord] = {}
    seen: dict[str, list[int]] = defaultdict(list)
    rejected: list[int] = []
    for lineno, v in rows:
        fid = v["firm_id"]
        if not fid:
            rejected.append(lineno)
            continue
        country = v["country"].upper()
        if not _ISO2.match(country):
            raise MalformedValue(f"{path}:{lineno}: country {v['country']!r} is not an ISO alpha-2 code")
        seen[fid].append(lineno)
        companies[fid] = CompanyRecord(
            firm_id=fid,
            country=country,
            revenue_usd=_opt_float(v.get("revenue_usd", ""), "revenue_usd", path, lineno),
            employees=_opt_int(v.get("employees", ""), "employees", path, lineno),
            guo_id=v.get("guo_id") or None,
            market_cap_usd=_opt_float(v.get("market_cap_usd", ""), "market_cap_usd", path, lineno),
        )
    dups = {k: lines for k, lines in seen.items() if len(lines) > 1}
    if dups:
        key = min(dups)
        if not lenient:
            raise DuplicateKey(key, dups[key])
        for k, lines in sorted(dups.items()):
            logger.warning("duplicate firm_id %r on lines %s; keeping line %d", k, lines, lines[-1])
    if rejected:
        logger.warning("%s: rejected %d rows with empty firm_id (lines %s)", path, len(rejected), rejected)
    return AffiliationTable(dict(sorted(companies.items())), (), rejected_lines=tuple(rejected))


def parse_affiliations(path, table: AffiliationTable, mapping: Mapping[str, str] | None = None) -> AffiliationTable:
    """Attach director positions to ``table``.

    Duplicate (director, firm) pairs collapse to one record (the first role
    seen is kept). Positions naming an unknown firm are dropped and counted.
    """
    _, rows = _open_rows(path, mapping, ("director_id", "firm_id"), ("role",))
    positions: dict[tuple[str, str], AffiliationRecord] = {}
    dangling = duplicates = 0
    for lineno, v in rows:
        did, fid = v["director_id"], v["firm_id"]
        if not did or not fid:
            raise MalformedValue(f"{path}:{lineno}: empty director_id or firm_id")
        if fid not in table.companies:
            dangling += 1
            continue
        key = (did, fid)
        if key in positions:
            duplicates += 1
            continue
        positions[key] = AffiliationRecord(did, fid, v.get("role") or None)
    if dangling:
        logger.warning("%s: dropped %d positions referencing unknown firms", path, dangling)
    return AffiliationTable(
        table.companies,
        tuple(sorted(positions.values())),
        rejected_lines=table.rejected_lines,
        dangling_positions=dangling,
        duplicate_positions=duplicates,
    )


def load_table(companies_path, affiliations_path, *, company_mapping=None, affiliation_mapping=None,
               lenient: bool = False) -> AffiliationTable:
    table = parse_companies(companies_path, company_mapping, lenient=lenient)
    return parse_affiliations(affiliations_path, table, affiliation_mapping)


def parse_aggregates(path, mapping: Mapping[str, str] | None = None) -> list[CountryAggregate]:
    optional = ("total_revenue_usd",) + tuple(SIZE_BAND_COLUMNS.values())
    _, rows = _open_rows(path, mapping, ("country", "firm_count"), optional)
    out = []
    for lineno, v in rows:
        count = _opt_int(v["firm_count"], "firm_count", path, lineno)
        if count is None or count < 1:
            raise MalformedValue(f"{path}:{lineno}: firm_count must be a positive integer")
        bands = {label: _opt_int(v.get(col, ""), col, path, lineno) for label, col in SIZE_BAND_COLUMNS.items()}
        size_counts = None
        if any(b is not None for b in bands.values()):
            size_counts = {label: (b or 0) for label, b in bands.items()}
        revenue = _opt_float(v.get("total_revenue_usd", ""), "total_revenue_usd", path, lineno)
        try:
            out.append(CountryAggregate(v["country"].upper(), count, revenue or None, size_counts))
        except ValueError as exc:
            raise MalformedValue(f"{path}:{lineno}: {exc}") from None
    return sorted(out, key=lambda a: a.country)


def parse_indicators(path, log_flags: Iterable[str] = ()) -> IndicatorTable:
    """Load a country x indicator panel, natural-log transforming flagged columns.

    A nonpositive value under a log flag becomes missing (with a warning).
    """
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc.strerror or exc}") from exc
    log_flags = frozenset(log_flags)
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaMismatch(f"{path}: empty file, no header row") from None
        if "country" not in header:
            raise SchemaMismatch(f"{path}: missing column 'country'")
        ci = header.index("country")
        codes = [h for i, h in enumerate(header) if i != ci]
        unknown = log_flags - set(codes)
        if unknown:
            raise SchemaMismatch(f"{path}: log-flagged indicators not in file: {sorted(unknown)}")
        rows: dict[str, dict[str, float | None]] = {}
        for lineno, raw in enumerate(reader, start=2):
            if not raw or all(not c.strip() for c in raw):
                continue
            country = raw[ci].strip().upper()
            row: dict[str, float | None] = {}
            for i, h in enumerate(header):
                if i == ci:
                    continue
                text = raw[i].strip() if i < len(raw) else ""
                if text == "" or text.lower() in ("na", "nan", ".."):
                    row[h] = None
                    continue
                try:
                    value = float(text)
                except ValueError:
                    raise MalformedValue(f"{path}:{lineno}: {h} value {text!r} is not a number") from None
                if not math.isfinite(value):
                    value = None
                elif h in log_flags:
                    if value <= 0:
                        logger.warning("%s:%d: nonpositive %s=%s under log flag, treated as missing",
                                       path, lineno, h, text)
                        value = None
                    else:
                        value = math.log(value)
                row[h] = value
            rows[country] = row
    return IndicatorTable(dict(sorted(rows.items())), log_flags)


# -- canonical dumps -----------------------------------------------------------

def format_decimal(value: float | int | None) -> str:
    """Shortest string that re-parses to the same value; empty for absent."""
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def dump_companies(table: AffiliationTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COMPANY_FIELDS)
        for fid in sorted(table.companies):
            c = table.companies[fid]
            w.writerow([c.firm_id, c.country, format_decimal(c.revenue_usd), format_decimal(c.employees),
                        c.guo_id or "", format_decimal(c.market_cap_usd)])


def dump_affiliations(table: AffiliationTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AFFILIATION_FIELDS)
        for p in sorted(table.positions):
            w.writerow([p.director_id, p.firm_id, p.role or ""])


def dump_table(table: AffiliationTable, directory, stem: str = "") -> tuple[Path, Path]:
    directory = Path(directory)
    os.makedirs(directory, exist_ok=True)
    cpath = directory / f"{stem}companies.csv"
    apath = directory / f"{stem}affiliations.csv"
    dump_companies(table, cpath)
    dump_affiliations(table, apath)
    return cpath, apath
