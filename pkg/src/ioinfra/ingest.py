"""Readers and writers for input-output data files and taxonomy files.

Canonical long format
---------------------
UTF-8 CSV with header ``year,origin,destination,value``. A row is one of:

* ``origin=<sector>, destination=<sector>``: intermediate flow;
* ``origin=<sector>, destination=FD``: final demand of the origin sector;
* ``origin=VA, destination=<sector>``: value added of the destination;
* ``origin=GO, destination=<sector>``: total (gross) output of the
  destination. If a year has no ``GO`` rows, total output is taken as the
  row total (intermediate use plus final demand);
* ``origin=CHECKSUM, destination=FLOWS``: optional sum of all flows for
  the year, verified on read.

Cells that are not listed are zero.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import IOTable, SectorCode, SectorTaxonomy, TableSeries
from .errors import (
    ChecksumError,
    DuplicateCellError,
    EmptySeriesError,
    ParseError,
    SchemaError,
    TaxonomyMismatchError,
    TaxonomyValidationError,
)

CANONICAL_HEADER = ("year", "origin", "destination", "value")
VA, FD, GO = "VA", "FD", "GO"
CHECKSUM, CHECKSUM_DEST = "CHECKSUM", "FLOWS"
RESERVED = {VA, FD, GO, CHECKSUM, CHECKSUM_DEST}
FORMATS = ("canonical-long", "wiod-wide")
CHECKSUM_RTOL = 1e-9


@dataclass(frozen=True)
class CanonicalRow:
    year: int
    origin: str
    destination: str
    value: float
    line: int | None = None


@dataclass(frozen=True)
class WiodLayout:
    """Column mapping for a WIOD national input-output table in wide CSV form.

    Sector rows are those whose ``origin_column`` is in ``origins``; their
    sector-code columns are intermediate flows and ``final_demand_columns``
    sum to final demand. Rows coded in ``value_added_rows`` sum to value
    added; the ``output_row`` row gives total output.
    """

    year_column: str = "Year"
    code_column: str = "Code"
    origin_column: str = "Origin"
    origins: tuple[str, ...] = ("Domestic",)
    final_demand_columns: tuple[str, ...] = ("CONS_h", "CONS_np", "CONS_g", "GFCF", "INVEN", "EXP")
    value_added_rows: tuple[str, ...] = ("VA",)
    output_row: str = "GO"
    ignored_columns: tuple[str, ...] = ("Description", "GO")


def _parse_value(text, line, what="value"):
    try:
        v = float(text)
    except (TypeError, ValueError):
        raise ParseError(f"{what} {text!r} is not a number", line) from None
    if not math.isfinite(v):
        raise ParseError(f"{what} {text!r} is not finite", line)
    return v


def _parse_year(text, line, years):
    try:
        y = int(text)
    except (TypeError, ValueError):
        raise ParseError(f"year {text!r} is not an integer", line) from None
    if years is not None and not (years[0] <= y <= years[1]):
        raise ParseError(f"year {y} outside configured range {years[0]}-{years[1]}", line)
    return y


def read_canonical_rows(path, years=None) -> list[CanonicalRow]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptySeriesError(f"{path}: file is empty")
        if tuple(h.strip().lower() for h in header) != CANONICAL_HEADER:
            raise ParseError(f"expected header {','.join(CANONICAL_HEADER)}, got {','.join(header)}", 1)
        for rec in reader:
            line = reader.line_num
            if not rec or all(not f.strip() for f in rec):
                continue
            if len(rec) != 4:
                raise ParseError(f"expected 4 fields, got {len(rec)}", line)
            year, origin, dest, value = (f.strip() for f in rec)
            if not origin or not dest:
                raise ParseError("empty origin or destination", line)
            rows.append(CanonicalRow(_parse_year(year, line, years), origin, dest,
                                     _parse_value(value, line), line))
    return rows


def assemble_series(rows: Iterable[CanonicalRow], region: str = "UK",
                    order: Sequence[str] | None = None, labels=None) -> TableSeries:
    """Build a :class:`TableSeries` from canonical rows."""
    by_year: dict[int, dict] = {}
    for row in rows:
        cells = by_year.setdefault(row.year, {})
        key = (row.origin, row.destination)
        if key in cells:
            raise DuplicateCellError(
                f"duplicate cell (year={row.year}, origin={row.origin}, destination={row.destination}); "
                f"first seen on line {cells[key].line}", row.line)
        if row.origin in (VA, GO) and row.destination in RESERVED:
            raise ParseError(f"invalid reserved pair {row.origin}->{row.destination}", row.line)
        if row.origin == CHECKSUM and row.destination != CHECKSUM_DEST:
            raise ParseError("CHECKSUM rows must have destination FLOWS", row.line)
        if row.destination == FD and row.origin in RESERVED:
            raise ParseError(f"invalid reserved pair {row.origin}->FD", row.line)
        cells[key] = row
    if not by_year:
        raise EmptySeriesError("no data rows found")

    labels = labels or {}
    tables = []
    codes_ref = None
    for year in sorted(by_year):
        cells = by_year[year]
        row_side, col_side = [], []
        for (o, d) in cells:
            if o not in RESERVED:
                row_side.append(o)
            if d not in RESERVED:
                col_side.append(d)
        row_set, col_set = set(row_side), set(col_side)
        if row_set != col_set:
            only_r = sorted(row_set - col_set)
            only_c = sorted(col_set - row_set)
            raise SchemaError(
                f"year {year}: sector set is not square (rows only: {only_r}, columns only: {only_c})")
        if order is not None:
            unknown = sorted(row_set - set(order))
            if unknown:
                raise TaxonomyMismatchError(f"year {year}: sectors not in ordering: {unknown}")
            codes = [c for c in order if c in row_set]
        else:
            codes = list(dict.fromkeys(row_side + col_side))
        if codes_ref is None:
            codes_ref = codes
        elif codes != codes_ref:
            raise SchemaError(f"year {year}: sector set differs from year {tables[0].year}")
        n = len(codes)
        pos = {c: i for i, c in enumerate(codes)}
        Z = np.zeros((n, n))
        f = np.zeros(n)
        va = np.zeros(n)
        x = np.zeros(n)
        has_go = False
        checksum = None
        for (o, d), row in cells.items():
            if o == CHECKSUM:
                checksum = row
            elif o == VA:
                va[pos[d]] = row.value
            elif o == GO:
                x[pos[d]] = row.value
                has_go = True
            elif d == FD:
                f[pos[o]] = row.value
            else:
                Z[pos[o], pos[d]] = row.value
        if not has_go:
            x = Z.sum(axis=1) + f
        if checksum is not None:
            total = Z.sum()
            if abs(total - checksum.value) > CHECKSUM_RTOL * max(abs(total), 1.0):
                raise ChecksumError(
                    f"year {year}: flows sum to {total!r} but checksum on line {checksum.line} "
                    f"says {checksum.value!r}")
        if np.any(x < 0):
            raise SchemaError(f"year {year}: negative total output")
        sectors = tuple(SectorCode(c, labels.get(c, "")) for c in codes)
        tables.append(IOTable(year, region, sectors, Z, f, va, x))
    return TableSeries(tuple(tables))


def read_wiod_rows(path, layout: WiodLayout | None = None, years=None) -> list[CanonicalRow]:
    """Translate a WIOD-style wide table into canonical rows."""
    layout = layout or WiodLayout()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptySeriesError(f"{path}: file is empty")
        records = [(reader.line_num, rec) for rec in reader]
    if not records:
        raise EmptySeriesError(f"{path}: no data rows")
    fields = reader.fieldnames
    for col in (layout.year_column, layout.code_column, layout.origin_column):
        if col not in fields:
            raise SchemaError(f"{path}: missing column {col!r}")
    sector_codes = []
    for _, rec in records:
        code = (rec.get(layout.code_column) or "").strip()
        if rec.get(layout.origin_column, "").strip() in layout.origins and code not in sector_codes:
            sector_codes.append(code)
    missing = [c for c in sector_codes if c not in fields]
    if missing:
        raise SchemaError(f"{path}: sector rows without matching columns: {missing}")
    fd_cols = [c for c in layout.final_demand_columns if c in fields]

    out = []
    va_acc: dict[tuple[int, str], float] = {}
    for line, rec in records:
        if None in rec:
            raise ParseError("row has more fields than the header", line)
        year = _parse_year(rec[layout.year_column], line, years)
        code = rec[layout.code_column].strip()
        origin = rec[layout.origin_column].strip()
        if origin in layout.origins and code in sector_codes:
            for dest in sector_codes:
                out.append(CanonicalRow(year, code, dest, _parse_value(rec[dest], line), line))
            fd = sum(_parse_value(rec[c], line) for c in fd_cols)
            out.append(CanonicalRow(year, code, FD, fd, line))
        elif code in layout.value_added_rows:
            for dest in sector_codes:
                va_acc[(year, dest)] = va_acc.get((year, dest), 0.0) + _parse_value(rec[dest], line)
        elif code == layout.output_row:
            for dest in sector_codes:
                out.append(CanonicalRow(year, GO, dest, _parse_value(rec[dest], line), line))
    out.extend(CanonicalRow(y, VA, d, v) for (y, d), v in sorted(va_acc.items()))
    return out


def parse_table_file(path, format: str = "canonical-long", region: str = "UK",
                     taxonomy: SectorTaxonomy | None = None, years=None,
                     layout: WiodLayout | None = None) -> TableSeries:
    """Parse a data file into a :class:`TableSeries` (tables not marked balanced).

    With a ``taxonomy`` the sector order follows the taxonomy declaration.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if format == "canonical-long":
        rows = read_canonical_rows(path, years)
    else:
        rows = read_wiod_rows(path, layout, years)
    order = taxonomy.codes if taxonomy is not None else None
    labels = {s.code: s.label for s in taxonomy.sectors} if taxonomy is not None else None
    return assemble_series(rows, region=region, order=order, labels=labels)


def _fmt(v: float) -> str:
    # repr is the shortest string that round-trips exactly
    return repr(float(v))


def write_canonical(series: TableSeries, path, checksum: bool = False) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CANONICAL_HEADER)
        for t in series:
            codes = t.codes
            for i, o in enumerate(codes):
                for j, d in enumerate(codes):
                    w.writerow((t.year, o, d, _fmt(t.flows[i, j])))
            for i, o in enumerate(codes):
                w.writerow((t.year, o, FD, _fmt(t.final_demand[i])))
            for j, d in enumerate(codes):
                w.writerow((t.year, VA, d, _fmt(t.value_added[j])))
            for j, d in enumerate(codes):
                w.writerow((t.year, GO, d, _fmt(t.total_output[j])))
            if checksum:
                w.writerow((t.year, CHECKSUM, CHECKSUM_DEST, _fmt(t.flows.sum())))


# -- taxonomy files ----------------------------------------------------------

def load_taxonomy(path, expected_codes: Iterable[str] | None = None) -> SectorTaxonomy:
    """Read a ``code,label,category`` taxonomy file.

    ``expected_codes`` (e.g. a table's sectors) must all be classified.
    """
    pairs = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["code", "label", "category"]:
            raise TaxonomyValidationError(f"{path}: expected header code,label,category")
        for rec in reader:
            if not rec:
                continue
            if len(rec) != 3:
                raise TaxonomyValidationError(f"{path} line {reader.line_num}: expected 3 fields")
            code, label, category = (f.strip() for f in rec)
            if not category:
                raise TaxonomyValidationError(
                    f"{path} line {reader.line_num}: sector {code!r} has no category")
            pairs.append((code, label, category))
    tax = SectorTaxonomy.from_pairs(pairs)
    if expected_codes is not None:
        tax.check_covers(expected_codes)
    return tax


def save_taxonomy(taxonomy: SectorTaxonomy, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("code", "label", "category"))
        for sector, category in taxonomy.entries:
            w.writerow((sector.code, sector.label, category))


def data_path(name: str) -> Path:
    return Path(str(resources.files("ioinfra") / "data" / name))


def default_taxonomy() -> SectorTaxonomy:
    """The bundled taxonomy: 11 transport and 7 infrastructure-service
    products plus the remaining product groups used by the model build."""
    return load_taxonomy(data_path("taxonomy.csv"))
