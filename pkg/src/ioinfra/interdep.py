"""Transport x infrastructure-service dependency maps."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .core import INFRASTRUCTURE, SectorTaxonomy, TableSeries
from .errors import EmptySeriesError, IncompatibleMapsError, ParseError, TaxonomyValidationError
from .ingest import data_path

DERIVED = "derived-threshold"
FIXTURE = "fixture"
SUBHEADINGS = {
    "transport.land": "Land transport",
    "transport.water": "Water transport",
    "transport.air": "Air transport",
    "transport.other": "Other transport",
}


@dataclass(frozen=True, eq=False)
class InterdependencyMap:
    rows: tuple[str, ...]
    columns: tuple[str, ...]
    cells: np.ndarray
    provenance: tuple[tuple[str, ...], ...]
    row_groups: tuple[str, ...] = ()

    def __post_init__(self):
        cells = np.array(self.cells, dtype=bool)
        if cells.shape != (len(self.rows), len(self.columns)):
            raise IncompatibleMapsError(f"cells shape {cells.shape} does not match labels")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    def __getitem__(self, key) -> bool:
        r, c = key
        return bool(self.cells[self.rows.index(r), self.columns.index(c)])

    def cell_provenance(self, row, column) -> str:
        return self.provenance[self.rows.index(row)][self.columns.index(column)]


def _labels(taxonomy: SectorTaxonomy):
    rows = taxonomy.codes_in("transport")
    cols = tuple(c for c in taxonomy.codes if taxonomy.category_of(c) in INFRASTRUCTURE)
    groups = tuple(taxonomy.category_of(r) for r in rows)
    return rows, cols, groups


def build_interdependency_map(series: TableSeries, taxonomy: SectorTaxonomy,
                              threshold: float = 0.0) -> InterdependencyMap:
    """Flag (transport t, service s) when the flow from s into t, summed over
    all years, exceeds ``threshold``."""
    if len(series) == 0:
        raise EmptySeriesError("cannot map an empty series")
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    taxonomy.check_covers(series.codes)
    rows, cols, groups = _labels(taxonomy)
    rows = tuple(r for r in rows if r in series.codes)
    groups = tuple(taxonomy.category_of(r) for r in rows)
    cols = tuple(c for c in cols if c in series.codes)
    total = np.zeros((len(rows), len(cols)))
    for t in series:
        ii = [t.index(c) for c in cols]
        jj = [t.index(r) for r in rows]
        # flows[service, transport] -> cell[transport, service]
        total += t.flows[np.ix_(ii, jj)].T
    prov = tuple((DERIVED,) * len(cols) for _ in rows)
    return InterdependencyMap(rows, cols, total > threshold, prov, groups)


def diff_maps(a: InterdependencyMap, b: InterdependencyMap) -> list[tuple[str, str]]:
    """Cells whose flags differ, in ``a``'s row/column order."""
    if set(a.rows) != set(b.rows) or set(a.columns) != set(b.columns) or \
            len(a.rows) != len(b.rows) or len(a.columns) != len(b.columns):
        raise IncompatibleMapsError("maps have different row/column sets")
    out = []
    for r in a.rows:
        for c in a.columns:
            if a[r, c] != b[r, c]:
                out.append((r, c))
    return out


def save_map(m: InterdependencyMap, target) -> None:
    """Write ``row,column,flag`` records to a path or an open text file."""
    if hasattr(target, "write"):
        _write_map(m, target)
        return
    with open(target, "w", newline="", encoding="utf-8") as fh:
        _write_map(m, fh)


def _write_map(m, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("row", "column", "flag"))
    for i, r in enumerate(m.rows):
        for j, c in enumerate(m.columns):
            w.writerow((r, c, int(m.cells[i, j])))


def load_map(path, taxonomy: SectorTaxonomy | None = None,
             provenance: str = FIXTURE) -> InterdependencyMap:
    """Read a ``row,column,flag`` map file; label order follows first appearance."""
    rows, cols, flags = [], [], {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["row", "column", "flag"]:
            raise ParseError("expected header row,column,flag", 1)
        for rec in reader:
            if not rec:
                continue
            if len(rec) != 3 or rec[2].strip() not in ("0", "1"):
                raise ParseError(f"bad map record {rec!r}", reader.line_num)
            r, c, f = (x.strip() for x in rec)
            if (r, c) in flags:
                raise ParseError(f"duplicate cell ({r}, {c})", reader.line_num)
            if r not in rows:
                rows.append(r)
            if c not in cols:
                cols.append(c)
            flags[(r, c)] = f == "1"
    missing = [(r, c) for r in rows for c in cols if (r, c) not in flags]
    if missing:
        raise ParseError(f"map is not rectangular; missing {missing[:3]}")
    cells = np.array([[flags[(r, c)] for c in cols] for r in rows], dtype=bool)
    groups = ()
    if taxonomy is not None:
        taxonomy.check_covers(rows + cols)
        groups = tuple(taxonomy.category_of(r) for r in rows)
    prov = tuple((provenance,) * len(cols) for _ in rows)
    return InterdependencyMap(tuple(rows), tuple(cols), cells, prov, groups)


def published_map(taxonomy: SectorTaxonomy | None = None) -> InterdependencyMap:
    """The published transport x infrastructure dependency pattern."""
    if taxonomy is None:
        from .ingest import default_taxonomy
        taxonomy = default_taxonomy()
    m = load_map(data_path("dependency_map.csv"), taxonomy)
    if set(m.rows) != set(taxonomy.codes_in("transport")):
        raise TaxonomyValidationError("bundled map rows do not match the taxonomy")
    return m


def render_grid(m: InterdependencyMap, taxonomy: SectorTaxonomy | None = None,
                yes: str = "✓", no: str = "×") -> str:
    """Plain-text grid with transport subheadings, one service per column."""
    label = (lambda c: taxonomy.label_of(c) or c) if taxonomy is not None else (lambda c: c)
    head_cols = [c for c in m.columns]
    width = max([len(label(r)) for r in m.rows] + [len("Transport")])
    lines = []
    lines.append("Columns:")
    for j, c in enumerate(head_cols, 1):
        cat = taxonomy.category_of(c) if taxonomy is not None else ""
        lines.append(f"  [{j}] {c} {label(c)}" + (f" ({cat})" if cat else ""))
    lines.append("")
    lines.append("Transport".ljust(width) + " | " + " ".join(f"[{j}]" for j in range(1, len(head_cols) + 1)))
    lines.append("-" * (width + 3 + 4 * len(head_cols)))
    groups = m.row_groups or ("",) * len(m.rows)
    current = None
    for i, r in enumerate(m.rows):
        g = groups[i]
        if g != current and g:
            lines.append(SUBHEADINGS.get(g, g))
            current = g
        marks = " ".join(f" {yes if m.cells[i, j] else no} " for j in range(len(head_cols)))
        lines.append(label(r).ljust(width) + " | " + marks)
    return "\n".join(lines) + "\n"
