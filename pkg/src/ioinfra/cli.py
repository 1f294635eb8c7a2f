"""Command-line interface.

Every subcommand exits 0 on success. On failure it writes one JSON object
``{"error": <type>, "message": <text>}`` to stderr and exits 1.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .balance import balance_table
from .errors import IOInfraError
from .ingest import FORMATS, data_path, default_taxonomy, write_canonical
from .interdep import build_interdependency_map, diff_maps, published_map, render_grid, save_map
from .model import LinearModel, published_model, predict
from .pipeline import (
    DataSource,
    PipelineConfig,
    emit_report,
    fixture_results,
    run_all,
    run_baseline_regression,
    run_pca_model_build,
    load_inputs,
    variance_csv,
)

SYNTHETIC_DATA = "synthetic_uk.csv"


def _years(text):
    lo, sep, hi = text.partition("-")
    return (int(lo), int(hi if sep else lo))


def _add_data_args(p, required=True):
    p.add_argument("data", nargs="*", help="data file(s); one per region for pooled panels")
    p.add_argument("--config", help="JSON pipeline configuration")
    p.add_argument("--format", choices=FORMATS, help="data file format (default canonical-long)")
    p.add_argument("--region", help="region label for data given on the command line")
    p.add_argument("--taxonomy", help="taxonomy CSV (code,label,category); default: bundled")
    p.add_argument("--years", type=_years, help="year range, e.g. 2000-2014")
    p.add_argument("--synthetic", action="store_true", help="use the bundled synthetic dataset")
    p.add_argument("--balance", action="store_true", default=None, help="RAS-balance tables first")
    p.add_argument("--tolerance", type=float, help="RAS tolerance")
    p.add_argument("--max-iterations", type=int, help="RAS iteration cap")
    p.add_argument("--retention", help="kaiser | fixed:K | cumulative:PCT")
    p.add_argument("--threshold", type=float, help="interdependency flow threshold")
    p.add_argument("--demand", choices=("row_total", "total_output"))
    p.add_argument("--seed", type=int)


def _config(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config) if getattr(args, "config", None) else PipelineConfig()
    changes = {}
    data = list(getattr(args, "data", None) or [])
    if getattr(args, "synthetic", False):
        data.append(str(data_path(SYNTHETIC_DATA)))
    if data:
        fmt = args.format or "canonical-long"
        region = args.region or "UK"
        sources = []
        for k, path in enumerate(data):
            sources.append(DataSource(path, fmt, region if len(data) == 1 else f"{region}{k + 1}"))
        changes["data"] = tuple(sources)
    elif getattr(args, "format", None) or getattr(args, "region", None):
        changes["data"] = tuple(
            replace(s, format=args.format or s.format, region=args.region or s.region)
            for s in cfg.data)
    for attr in ("taxonomy", "retention", "threshold", "demand", "seed"):
        val = getattr(args, attr, None)
        if val is not None:
            changes[attr] = val
    if getattr(args, "years", None):
        changes["year_range"] = args.years
    if getattr(args, "balance", None):
        changes["balance"] = True
    ras = {}
    if getattr(args, "tolerance", None) is not None:
        ras["tolerance"] = args.tolerance
    if getattr(args, "max_iterations", None) is not None:
        ras["max_iterations"] = args.max_iterations
    if ras:
        changes["ras"] = replace(cfg.ras, **ras)
    if getattr(args, "out_dir", None):
        changes["output_dir"] = args.out_dir
    return replace(cfg, **changes)


def _print_json(obj):
    print(json.dumps(obj, indent=2, sort_keys=True))


def cmd_ingest(args):
    cfg = _config(args)
    taxonomy, series_list = load_inputs(replace(cfg, balance=False))
    summary = []
    for src, s in zip(cfg.data, series_list):
        resid = max(float(np.max(np.abs(t.balance_residual()) / np.maximum(t.total_output, 1.0)))
                    for t in s)
        summary.append({"path": src.path, "region": src.region, "years": list(s.years),
                        "sectors": len(s.codes), "max_relative_balance_residual": resid})
        if args.out:
            write_canonical(s, args.out)
    _print_json(summary)


def cmd_balance(args):
    cfg = _config(args)
    taxonomy, series_list = load_inputs(replace(cfg, balance=False))
    balanced = series_list[0].map(lambda t: balance_table(t, cfg.ras))
    write_canonical(balanced, args.out)
    _print_json({"out": args.out, "years": list(balanced.years)})


def cmd_interdep(args):
    if args.paper_fixture:
        taxonomy = default_taxonomy()
        m = published_map(taxonomy)
    else:
        cfg = _config(args)
        taxonomy, series_list = load_inputs(cfg)
        m = build_interdependency_map(series_list[0], taxonomy, cfg.threshold)
    if args.out:
        save_map(m, args.out)
    sys.stdout.write(render_grid(m, taxonomy))
    if args.compare:
        ref = published_map(taxonomy)
        diff = diff_maps(m, ref)
        _print_json({"differences_vs_published": [list(c) for c in diff]})


def cmd_regress(args):
    cfg = _config(args)
    taxonomy, series_list = load_inputs(cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = run_baseline_regression(series_list, taxonomy, cfg.demand)
    out = res.to_dict()
    out["warnings"] = [str(w.message) for w in caught]
    _print_json(out)


def cmd_pca(args):
    cfg = _config(args)
    taxonomy, series_list = load_inputs(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result, selection, _ = run_pca_model_build(series_list, taxonomy, cfg)
    text = variance_csv(result.variance_table)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    _print_json(selection.to_dict())


def cmd_fit(args):
    cfg = _config(args)
    if args.paper_fixture:
        model = published_model()
    else:
        taxonomy, series_list = load_inputs(cfg)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            _, _, model = run_pca_model_build(series_list, taxonomy, cfg)
    if args.out:
        model.save(args.out)
    _print_json(model.to_dict())


def cmd_predict(args):
    model = published_model() if args.paper_fixture or not args.model else LinearModel.load(args.model)
    _print_json({"prediction": predict(model, args.values), "units": model.units,
                 "provenance": model.provenance})


def cmd_report(args):
    """Summarize an existing report bundle."""
    out = Path(args.bundle)
    manifest = json.loads((out / "manifest.json").read_text())
    lines = [f"Report bundle {out} (config {manifest['config_sha256'][:12]})"]
    if (out / "model.json").exists():
        model = LinearModel.load(out / "model.json")
        terms = " + ".join(f"{c:.3f}*{p}" for c, p in zip(model.coefficients, model.predictors))
        lines.append(f"model [{model.provenance}]: transport = {terms} + {model.intercept:.3f}")
        if model.r_squared is not None:
            lines.append(f"  R^2 = {model.r_squared:.4f}; m = {model.m}; p = {model.p}")
    if (out / "variance_table.csv").exists():
        lines.append("")
        lines.append((out / "variance_table.csv").read_text().rstrip())
    if (out / "interdependency_grid.txt").exists():
        lines.append("")
        lines.append((out / "interdependency_grid.txt").read_text().rstrip())
    for note in manifest.get("notes", []):
        lines.append(f"note: {note}")
    print("\n".join(lines))


def cmd_run_all(args):
    cfg = _config(args)
    results = fixture_results(cfg) if args.paper_fixture else run_all(cfg)
    digests = emit_report(results, cfg.output_dir, timestamp=args.timestamp)
    _print_json({"output_dir": cfg.output_dir, "files": digests})


def build_parser():
    ap = argparse.ArgumentParser(prog="ioinfra", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse data files and summarize them")
    _add_data_args(p)
    p.add_argument("--out", help="write the (first) series in canonical form")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("balance", help="RAS-balance tables to their own margins")
    _add_data_args(p)
    p.add_argument("--out", required=True, help="canonical CSV for the balanced series")
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("interdep", help="transport x infrastructure dependency map")
    _add_data_args(p)
    p.add_argument("--paper-fixture", action="store_true", help="show the published map")
    p.add_argument("--compare", action="store_true", help="diff against the published map")
    p.add_argument("--out", help="write the map as row,column,flag CSV")
    p.set_defaults(func=cmd_interdep)

    p = sub.add_parser("regress", help="baseline regression with VIF diagnostics")
    _add_data_args(p)
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("pca", help="variance table and representative selection")
    _add_data_args(p)
    p.add_argument("--out", help="write the variance table CSV")
    p.set_defaults(func=cmd_pca)

    p = sub.add_parser("fit", help="fit the final linear model")
    _add_data_args(p)
    p.add_argument("--paper-fixture", action="store_true", help="emit the published model")
    p.add_argument("--out", help="model JSON path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict transport value from sector values")
    p.add_argument("values", nargs="+", type=float)
    p.add_argument("--model", help="model JSON (default: published model)")
    p.add_argument("--paper-fixture", action="store_true")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("report", help="summarize a report bundle")
    p.add_argument("bundle", help="report directory written by run-all")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("run-all", help="full pipeline and report bundle")
    _add_data_args(p)
    p.add_argument("--paper-fixture", action="store_true", help="fixtures only, no data")
    p.add_argument("--out-dir", help="report directory (default from config: report)")
    p.add_argument("--timestamp", help="fixed manifest timestamp")
    p.set_defaults(func=cmd_run_all)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (IOInfraError, OSError, ValueError, KeyError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(json.dumps(err) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
