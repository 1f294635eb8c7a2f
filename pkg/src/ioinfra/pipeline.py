"""End-to-end analysis: panel construction, regressions, PCA build, reports."""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io
import json
import os
import platform
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, kernels
from .balance import RASSettings, balance_table
from .core import INFRASTRUCTURE, SectorTaxonomy, TableSeries, aggregate_by
from .errors import (
    ConstantColumnError,
    DegreesOfFreedomWarning,
    EmptySeriesError,
    InsufficientObservationsError,
    ReportIOError,
)
from .ingest import load_taxonomy, default_taxonomy, parse_table_file
from .interdep import (
    InterdependencyMap,
    build_interdependency_map,
    diff_maps,
    published_map,
    render_grid,
    save_map,
)
from .model import FITTED, LinearModel, published_model
from .pca import FactorSelection, PCAResult, Retention, pca_fit, select_representatives, variance_table
from .stats import RegressionResult, correlation_matrix, ols_fit

DATA_DIR_ENV = "IOINFRA_DATA_DIR"
PROTECTED = ("energy", "waste", "communication", "water")
RESPONSE = "transport"
DOF_WARN_BELOW = 10

# published variance decomposition: first 14 components of 46 variables
PUBLISHED_EIGENVALUES = (30.931, 6.599, 4.190, 1.307, 0.876, 0.612, 0.441, 0.374,
                     0.215, 0.160, 0.120, 0.090, 0.056, 0.029)
PUBLISHED_ROTATED_SUMS = (27.307, 7.314, 6.666, 1.740)
PUBLISHED_N_VARIABLES = 46


@dataclass(frozen=True)
class DataSource:
    path: str
    format: str = "canonical-long"
    region: str = "UK"


@dataclass(frozen=True)
class PipelineConfig:
    data: tuple[DataSource, ...] = ()
    taxonomy: str | None = None
    year_range: tuple[int, int] = (2000, 2014)
    balance: bool = False
    ras: RASSettings = field(default_factory=RASSettings)
    retention: str = "kaiser"
    threshold: float = 0.0
    demand: str = "row_total"
    output_dir: str = "report"
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.year_range
        if lo > hi:
            raise ValueError(f"empty year range {lo}-{hi}")
        if self.demand not in ("row_total", "total_output"):
            raise ValueError(f"unknown demand definition {self.demand!r}")
        Retention.parse(self.retention)

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "PipelineConfig":
        d = dict(d)
        base = Path(base_dir) if base_dir else None
        default_dir = os.environ.get(DATA_DIR_ENV)

        def resolve(p):
            p = Path(p).expanduser()
            if p.is_absolute():
                return str(p)
            if base is not None and (base / p).exists():
                return str(base / p)
            if default_dir:
                return str(Path(default_dir) / p)
            return str(base / p) if base is not None else str(p)

        data = []
        for item in d.pop("data", []) or []:
            if isinstance(item, str):
                item = {"path": item}
            item = dict(item)
            item["path"] = resolve(item["path"])
            data.append(DataSource(**item))
        if d.get("taxonomy"):
            d["taxonomy"] = resolve(d["taxonomy"])
        if "ras" in d:
            d["ras"] = RASSettings(**d["ras"])
        if "year_range" in d:
            d["year_range"] = tuple(d["year_range"])
        return cls(data=tuple(data), **d)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh), base_dir=path.parent)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["data"] = [asdict(s) for s in self.data]
        d["year_range"] = list(self.year_range)
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True, eq=False)
class Panel:
    """Observations (region-years) by variables of sector demand."""

    observations: tuple[tuple[str, int], ...]
    names: tuple[str, ...]
    values: np.ndarray

    def column(self, name) -> np.ndarray:
        return self.values[:, self.names.index(name)]

    def columns(self, names: Sequence[str]) -> np.ndarray:
        return self.values[:, [self.names.index(n) for n in names]]


def _as_series_list(series) -> list[TableSeries]:
    if isinstance(series, TableSeries):
        return [series]
    return list(series)


def build_panel(series, taxonomy: SectorTaxonomy, demand: str = "row_total") -> Panel:
    """One observation per table; variables are the transport aggregate, the
    four infrastructure aggregates and every remaining product group.

    Several series (e.g. one per region) are pooled into one panel.
    """
    series_list = _as_series_list(series)
    if not series_list or all(len(s) == 0 for s in series_list):
        raise EmptySeriesError("no tables to build a panel from")
    assignment = {}
    for code in series_list[0].codes:
        cat = taxonomy.category_of(code)
        if cat.startswith("transport"):
            assignment[code] = RESPONSE
        elif cat in INFRASTRUCTURE:
            assignment[code] = cat
        else:
            assignment[code] = code
    others = [c for c in taxonomy.codes if assignment.get(c) == c]
    order = [RESPONSE, *PROTECTED, *others]
    obs, rows = [], []
    names = None
    for s in series_list:
        for t in s:
            agg = aggregate_by(t, assignment, order=order)
            vals = agg.row_totals() if demand == "row_total" else agg.total_output
            if names is None:
                names = agg.codes
            elif agg.codes != names:
                raise ValueError("pooled series do not share a sector set")
            obs.append((t.region, t.year))
            rows.append(vals)
    return Panel(tuple(obs), tuple(names), np.vstack(rows))


def _check_dof(m, p, stacklevel=3):
    if m - p - 1 < DOF_WARN_BELOW:
        warnings.warn(f"only {m - p - 1} residual degrees of freedom (m={m}, p={p})",
                      DegreesOfFreedomWarning, stacklevel=stacklevel)


def _fit_panel(panel: Panel, predictors: Sequence[str], strict: bool) -> RegressionResult:
    X = panel.columns(predictors)
    y = panel.column(RESPONSE)
    m, p = X.shape
    if m <= p + 1:
        raise InsufficientObservationsError(
            f"{m} observations cannot identify {p} predictors plus intercept (m={m}, p={p})", m=m, p=p)
    sd = X.std(axis=0)
    for j in np.flatnonzero(sd == 0):
        raise ConstantColumnError(f"predictor {predictors[j]!r} is constant across observations",
                                  column=predictors[j])
    _check_dof(m, p, stacklevel=4)
    return ols_fit(X, y, names=predictors, strict=strict)


def run_baseline_regression(series, taxonomy: SectorTaxonomy, demand: str = "row_total") -> RegressionResult:
    """Transport demand on the four infrastructure demands.

    Exact collinearity does not raise here: the minimum-norm fit is returned
    with infinite VIFs and ``multicollinear`` set.
    """
    panel = build_panel(series, taxonomy, demand)
    return _fit_panel(panel, PROTECTED, strict=False)


def run_pca_model_build(series, taxonomy: SectorTaxonomy, config: PipelineConfig | None = None,
                        panel: Panel | None = None):
    """PCA on all non-transport variables, representative selection, final OLS.

    Returns ``(PCAResult, FactorSelection, LinearModel)``.
    """
    config = config or PipelineConfig()
    panel = panel or build_panel(series, taxonomy, config.demand)
    names = [n for n in panel.names if n != RESPONSE]
    X = panel.columns(names)
    R = correlation_matrix(X, names)
    result = pca_fit(R, config.retention, names)
    selection = select_representatives(result, PROTECTED)
    predictors = list(PROTECTED) + list(selection.variables)
    fit = _fit_panel(panel, predictors, strict=True)
    labels = {}
    for p in predictors:
        if p in taxonomy:
            labels[p] = taxonomy.label_of(p)
    model = LinearModel(
        predictors=tuple(predictors),
        coefficients=tuple(fit.coefficients),
        intercept=fit.intercept,
        r_squared=fit.r_squared,
        vifs=tuple(fit.vifs),
        provenance=FITTED,
        m=fit.m,
        labels=labels,
    )
    return result, selection, model


# -- loading ------------------------------------------------------------------

def load_inputs(config: PipelineConfig):
    taxonomy = load_taxonomy(config.taxonomy) if config.taxonomy else default_taxonomy()
    if not config.data:
        raise EmptySeriesError("configuration lists no data files")
    series_list = []
    for src in config.data:
        s = parse_table_file(src.path, src.format, region=src.region, taxonomy=taxonomy,
                             years=config.year_range)
        taxonomy.check_covers(s.codes)
        if config.balance:
            s = s.map(lambda t: balance_table(t, config.ras))
        series_list.append(s)
    return taxonomy, series_list


@dataclass
class RunResults:
    config: PipelineConfig
    taxonomy: SectorTaxonomy
    interdependency: InterdependencyMap | None = None
    reference_map: InterdependencyMap | None = None
    baseline: RegressionResult | None = None
    pca: PCAResult | None = None
    selection: FactorSelection | None = None
    model: LinearModel | None = None
    variance_rows: list | None = None
    m: int | None = None
    notes: list = field(default_factory=list)


def run_all(config: PipelineConfig) -> RunResults:
    taxonomy, series_list = load_inputs(config)
    res = RunResults(config, taxonomy)
    if len(series_list) > 1:
        res.notes.append("interdependency map uses the first data source only")
    res.interdependency = build_interdependency_map(series_list[0], taxonomy, config.threshold)
    try:
        res.reference_map = published_map(taxonomy)
    except Exception:  # taxonomy not compatible with the bundled map
        res.reference_map = None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res.baseline = run_baseline_regression(series_list, taxonomy, config.demand)
        panel = build_panel(series_list, taxonomy, config.demand)
        res.pca, res.selection, res.model = run_pca_model_build(
            series_list, taxonomy, config, panel=panel)
    res.notes.extend(sorted({f"{w.category.__name__}: {w.message}" for w in caught}))
    res.variance_rows = res.pca.variance_table
    res.m = len(panel.observations)
    return res


def fixture_results(config: PipelineConfig | None = None) -> RunResults:
    """Results assembled from the published fixtures only (no data files)."""
    config = config or PipelineConfig()
    taxonomy = default_taxonomy()
    res = RunResults(config, taxonomy)
    res.interdependency = published_map(taxonomy)
    res.model = published_model()
    res.variance_rows = variance_table(PUBLISHED_EIGENVALUES, PUBLISHED_ROTATED_SUMS,
                                       n_variables=PUBLISHED_N_VARIABLES)
    res.notes.append("fixture mode: no data was read")
    return res


# -- reports ----------------------------------------------------------------

VARIANCE_HEADER = (
    "component",
    "initial_total", "initial_percent", "initial_cumulative",
    "extraction_total", "extraction_percent", "extraction_cumulative",
    "rotation_total", "rotation_percent", "rotation_cumulative",
)


def _f(v, nd=3):
    if v is None:
        return ""
    # round first so tiny negative eigenvalues print as 0.000, not -0.000
    return f"{round(v, nd) + 0.0:.{nd}f}"


def variance_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(VARIANCE_HEADER)
    for r in rows:
        ext = r.extraction or (None, None, None)
        rot = r.rotation or (None, None, None)
        w.writerow((r.component, *(_f(v) for v in r.initial), *(_f(v) for v in ext),
                    *(_f(v) for v in rot)))
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _ensure_writable(out: Path):
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ReportIOError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK | os.X_OK):
        raise ReportIOError(f"output directory {out} is not writable")
    probe = out / ".write-probe"
    try:
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ReportIOError(f"output directory {out} is not writable: {exc}") from exc


def emit_report(results: RunResults, output_dir=None, timestamp: str | None = None) -> dict:
    """Write the report bundle and return ``{filename: sha256}``.

    Every file except ``manifest.json``'s ``timestamp`` field is a pure
    function of the inputs and configuration.
    """
    out = Path(output_dir or results.config.output_dir)
    if not any([results.model, results.variance_rows, results.interdependency, results.baseline]):
        raise ValueError("nothing to report: no analysis ran")
    _ensure_writable(out)
    files: dict[str, str] = {}
    if results.variance_rows is not None:
        files["variance_table.csv"] = variance_csv(results.variance_rows)
    if results.interdependency is not None:
        buf = io.StringIO()
        save_map(results.interdependency, buf)
        files["interdependency_map.csv"] = buf.getvalue()
        files["interdependency_grid.txt"] = render_grid(results.interdependency, results.taxonomy)
        if results.reference_map is not None:
            try:
                diff = [list(c) for c in diff_maps(results.interdependency, results.reference_map)]
            except Exception as exc:  # label sets differ
                diff = {"error": str(exc)}
            files["interdependency_diff.json"] = _json({"differences_vs_published": diff})
    if results.model is not None:
        files["model.json"] = _json(results.model.to_dict())
    if results.baseline is not None:
        files["baseline_regression.json"] = _json(results.baseline.to_dict())
    if results.selection is not None:
        files["factor_selection.json"] = _json(results.selection.to_dict())
    if results.pca is not None:
        files["pca.json"] = _json({
            "variables": list(results.pca.names),
            "eigenvalues": [float(v) for v in results.pca.eigenvalues],
            "retention": str(results.pca.retention),
            "retained": results.pca.retained,
            "loadings": np.round(results.pca.loadings, 12).tolist(),
            "rotated_loadings": np.round(results.pca.rotated_loadings, 12).tolist(),
        })
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")
    digests = {name: hashlib.sha256(text.encode()).hexdigest() for name, text in sorted(files.items())}
    manifest = {
        "config": results.config.to_dict(),
        "config_sha256": results.config.digest(),
        "files": digests,
        "observations": results.m,
        "notes": list(results.notes),
        "timestamp": timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "versions": {
            "ioinfra": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "kernel_backend": kernels.BACKEND,
        },
    }
    (out / "manifest.json").write_text(_json(manifest), encoding="utf-8")
    return digests
