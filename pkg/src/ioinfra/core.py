"""Immutable data model: sectors, taxonomies, input-output tables and series.

Monetary quantities are carried in "table units" (millions of currency for
WIOD-derived data) and are never converted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    EmptyCategoryError,
    SchemaError,
    TaxonomyMismatchError,
    TaxonomyValidationError,
    UnbalancedTableError,
)

CATEGORIES = (
    "transport.land",
    "transport.water",
    "transport.air",
    "transport.other",
    "energy",
    "water",
    "waste",
    "communication",
    "other",
)
INFRASTRUCTURE = ("energy", "water", "waste", "communication")
BALANCE_RTOL = 1e-6
UNITS = "table units (millions of currency)"


def _frozen(values, ndim, name):
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise SchemaError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def category_matches(category: str, selector: str) -> bool:
    """True if ``category`` equals ``selector`` or sits under it (``transport``
    selects every ``transport.*`` category)."""
    return category == selector or category.startswith(selector + ".")


@dataclass(frozen=True)
class SectorCode:
    code: str
    label: str = ""

    def __post_init__(self):
        if not self.code or not self.code.strip():
            raise TaxonomyValidationError("sector code must be non-empty")


@dataclass(frozen=True)
class SectorTaxonomy:
    """Ordered classification of sector codes into infrastructure categories.

    Declaration order is the canonical sector ordering used everywhere else.
    """

    entries: tuple[tuple[SectorCode, str], ...]

    def __post_init__(self):
        seen = set()
        for sector, category in self.entries:
            if sector.code in seen:
                raise TaxonomyValidationError(f"duplicate sector code {sector.code!r}")
            if not category:
                raise TaxonomyValidationError(f"sector {sector.code!r} has no category")
            if category not in CATEGORIES:
                raise TaxonomyValidationError(
                    f"unknown category {category!r} for sector {sector.code!r}"
                )
            seen.add(sector.code)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple]) -> "SectorTaxonomy":
        """Build from ``(code, label, category)`` or ``(code, category)`` tuples."""
        entries = []
        for item in pairs:
            if len(item) == 3:
                code, label, category = item
            else:
                code, category = item
                label = ""
            entries.append((SectorCode(code, label), category))
        return cls(tuple(entries))

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(s.code for s, _ in self.entries)

    @property
    def sectors(self) -> tuple[SectorCode, ...]:
        return tuple(s for s, _ in self.entries)

    def __contains__(self, code) -> bool:
        return code in self._index

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def _index(self) -> dict:
        # dataclass is frozen; cache through object.__setattr__
        try:
            return self.__dict__["_idx"]
        except KeyError:
            idx = {s.code: c for s, c in self.entries}
            object.__setattr__(self, "_idx", idx)
            return idx

    def category_of(self, code: str) -> str:
        try:
            return self._index[code]
        except KeyError:
            raise TaxonomyMismatchError(f"sector {code!r} not in taxonomy") from None

    def label_of(self, code: str) -> str:
        for s, _ in self.entries:
            if s.code == code:
                return s.label
        raise TaxonomyMismatchError(f"sector {code!r} not in taxonomy")

    def codes_in(self, selector: str) -> tuple[str, ...]:
        return tuple(s.code for s, c in self.entries if category_matches(c, selector))

    def is_complete(self) -> bool:
        return all(
            self.codes_in(c) for c in ("transport", "energy", "water", "waste", "communication")
        )

    def require_complete(self) -> None:
        missing = [
            c for c in ("transport", "energy", "water", "waste", "communication")
            if not self.codes_in(c)
        ]
        if missing:
            raise TaxonomyValidationError(f"taxonomy has no sectors for {', '.join(missing)}")

    def check_covers(self, codes: Iterable[str]) -> None:
        missing = [c for c in codes if c not in self]
        if missing:
            raise TaxonomyValidationError(
                f"taxonomy is missing sector codes: {', '.join(missing)}"
            )


@dataclass(frozen=True, eq=False)
class IOTable:
    """One region-year symmetric input-output table.

    ``flows[i, j]`` is the flow from supplying sector ``i`` to consuming
    sector ``j``. Arrays are copied and made read-only on construction.
    """

    year: int
    region: str
    sectors: tuple[SectorCode, ...]
    flows: np.ndarray
    final_demand: np.ndarray
    value_added: np.ndarray
    total_output: np.ndarray
    balanced: bool = False
    units: str = UNITS

    def __post_init__(self):
        sectors = tuple(s if isinstance(s, SectorCode) else SectorCode(str(s)) for s in self.sectors)
        object.__setattr__(self, "sectors", sectors)
        n = len(sectors)
        if len({s.code for s in sectors}) != n:
            raise SchemaError("duplicate sector codes in table")
        flows = _frozen(self.flows, 2, "flows")
        if flows.shape != (n, n):
            raise SchemaError(f"flows has shape {flows.shape}, expected ({n}, {n})")
        object.__setattr__(self, "flows", flows)
        for name in ("final_demand", "value_added", "total_output"):
            vec = _frozen(getattr(self, name), 1, name)
            if vec.shape != (n,):
                raise SchemaError(f"{name} has length {vec.shape[0]}, expected {n}")
            object.__setattr__(self, name, vec)
        for name in ("flows", "final_demand", "total_output", "value_added"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise SchemaError(f"{name} contains non-finite values")
        if np.any(self.total_output < 0):
            raise SchemaError("total_output must be non-negative")
        if self.balanced:
            resid = self.balance_residual()
            scale = np.maximum(np.abs(self.total_output), 1.0)
            bad = np.flatnonzero(np.abs(resid) > BALANCE_RTOL * scale)
            if bad.size:
                i = bad[0]
                raise UnbalancedTableError(
                    f"row {sectors[i].code!r} violates balance: residual {resid[i]:.6g}"
                )

    @property
    def n(self) -> int:
        return len(self.sectors)

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(s.code for s in self.sectors)

    def index(self, code: str) -> int:
        try:
            return self.codes.index(code)
        except ValueError:
            raise TaxonomyMismatchError(f"sector {code!r} not in table") from None

    def row_totals(self) -> np.ndarray:
        """Intermediate use plus final demand, per supplying sector."""
        return self.flows.sum(axis=1) + self.final_demand

    def balance_residual(self) -> np.ndarray:
        return self.row_totals() - self.total_output

    def replace(self, **changes) -> "IOTable":
        kwargs = dict(
            year=self.year, region=self.region, sectors=self.sectors, flows=self.flows,
            final_demand=self.final_demand, value_added=self.value_added,
            total_output=self.total_output, balanced=self.balanced, units=self.units,
        )
        kwargs.update(changes)
        return IOTable(**kwargs)

    def same_values(self, other: "IOTable") -> bool:
        return (
            self.year == other.year
            and self.region == other.region
            and self.codes == other.codes
            and all(
                np.array_equal(getattr(self, k), getattr(other, k))
                for k in ("flows", "final_demand", "value_added", "total_output")
            )
        )


@dataclass(frozen=True)
class TableSeries:
    tables: tuple[IOTable, ...] = field(default_factory=tuple)

    def __post_init__(self):
        tables = tuple(self.tables)
        object.__setattr__(self, "tables", tables)
        for prev, cur in zip(tables, tables[1:]):
            if cur.year <= prev.year:
                raise SchemaError(f"years must be strictly increasing ({prev.year} then {cur.year})")
            if cur.codes != prev.codes:
                raise SchemaError(f"sector ordering differs between {prev.year} and {cur.year}")

    def __len__(self):
        return len(self.tables)

    def __iter__(self):
        return iter(self.tables)

    def __getitem__(self, i):
        return self.tables[i]

    @property
    def years(self) -> tuple[int, ...]:
        return tuple(t.year for t in self.tables)

    @property
    def codes(self) -> tuple[str, ...]:
        return self.tables[0].codes if self.tables else ()

    def map(self, fn) -> "TableSeries":
        return TableSeries(tuple(fn(t) for t in self.tables))


def aggregate_by(table: IOTable, assignment: Mapping[str, str],
                 order: Sequence[str] | None = None) -> IOTable:
    """Sum sectors into groups given a sector -> group assignment.

    Group order follows ``order`` if given, otherwise first appearance in
    the table's sector order.
    """
    missing = [c for c in table.codes if c not in assignment]
    if missing:
        raise TaxonomyMismatchError(f"sectors without a group: {', '.join(missing)}")
    if order is None:
        order = list(dict.fromkeys(assignment[c] for c in table.codes))
    else:
        order = [g for g in order if any(assignment[c] == g for c in table.codes)]
    pos = {g: k for k, g in enumerate(order)}
    # membership matrix S (groups x sectors); aggregated flows = S Z S^T
    S = np.zeros((len(order), table.n))
    for j, code in enumerate(table.codes):
        S[pos[assignment[code]], j] = 1.0
    if list(order) == list(table.codes):
        labels = table.sectors
    else:
        labels = tuple(SectorCode(g, g) for g in order)
    return IOTable(
        year=table.year,
        region=table.region,
        sectors=labels,
        flows=S @ table.flows @ S.T,
        final_demand=S @ table.final_demand,
        value_added=S @ table.value_added,
        total_output=S @ table.total_output,
        balanced=table.balanced,
        units=table.units,
    )


def aggregate_sectors(table: IOTable, taxonomy: SectorTaxonomy,
                      grouping: Mapping[str, Iterable[str]]) -> IOTable:
    """Aggregate a table's sectors into groups of taxonomy categories.

    ``grouping`` maps a group name to the categories it contains; it must
    partition :data:`CATEGORIES` (category selectors such as ``"transport"``
    expand to their subcategories).
    """
    cat_to_group = {}
    for group, cats in grouping.items():
        for sel in cats:
            hits = [c for c in CATEGORIES if category_matches(c, sel)]
            if not hits:
                raise TaxonomyValidationError(f"unknown category {sel!r} in grouping")
            for c in hits:
                if c in cat_to_group and cat_to_group[c] != group:
                    raise TaxonomyValidationError(f"category {c!r} assigned to two groups")
                cat_to_group[c] = group
    uncovered = [c for c in CATEGORIES if c not in cat_to_group]
    if uncovered:
        raise TaxonomyValidationError(f"grouping does not cover: {', '.join(uncovered)}")
    assignment = {}
    for code in table.codes:
        assignment[code] = cat_to_group[taxonomy.category_of(code)]
    return aggregate_by(table, assignment, order=list(grouping))


def total_flow_between(series: TableSeries, from_category: str, to_category: str,
                       taxonomy: SectorTaxonomy) -> np.ndarray:
    """Per-year sum of flows from sectors of one category into another."""
    src = [c for c in taxonomy.codes_in(from_category) if c in series.codes]
    dst = [c for c in taxonomy.codes_in(to_category) if c in series.codes]
    for sel, members in ((from_category, src), (to_category, dst)):
        if not members:
            raise EmptyCategoryError(f"category {sel!r} has no sectors in the series")
    out = np.empty(len(series))
    for k, t in enumerate(series):
        ii = [t.index(c) for c in src]
        jj = [t.index(c) for c in dst]
        out[k] = t.flows[np.ix_(ii, jj)].sum()
    return out
