import json
import os
import warnings

import numpy as np
import pytest

from ioinfra.core import IOTable, SectorTaxonomy, TableSeries
from ioinfra.errors import (
    ConstantColumnError,
    DegreesOfFreedomWarning,
    InsufficientObservationsError,
    ModelInputError,
    ReportIOError,
)
from ioinfra.ingest import data_path, write_canonical
from ioinfra.model import (
    PUBLISHED_COEFFICIENTS,
    PUBLISHED_FIXTURE,
    PUBLISHED_INTERCEPT,
    LinearModel,
    predict,
    published_model,
)
from ioinfra.pipeline import (
    DATA_DIR_ENV,
    DataSource,
    PipelineConfig,
    build_panel,
    emit_report,
    fixture_results,
    run_all,
    run_baseline_regression,
    run_pca_model_build,
)
from ioinfra.synthetic import synthetic_series

SMALL = SectorTaxonomy.from_pairs([
    ("T1", "transport.land"), ("T2", "transport.air"), ("E", "energy"),
    ("W", "water"), ("S", "waste"), ("C", "communication"), ("O", "other"),
])


def demand_series(D, region="UK"):
    """Tables with no intermediate flows, so demand equals final demand."""
    n = len(SMALL)
    tables = [IOTable(2000 + k, region, SMALL.sectors, np.zeros((n, n)), row, np.zeros(n), row)
              for k, row in enumerate(np.asarray(D, float))]
    return TableSeries(tuple(tables))


def quiet(fn, *a, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fn(*a, **kw)


def test_baseline_recovers_exact_dependence(rng):
    m = 20
    D = rng.uniform(50, 150, (m, len(SMALL)))
    D[:, 0] = 2 * D[:, 2] * 0.25
    D[:, 1] = 2 * D[:, 2] * 0.75
    res = quiet(run_baseline_regression, demand_series(D), SMALL)
    assert res.names == ("energy", "waste", "communication", "water")
    assert res.coefficients[0] == pytest.approx(2.0, abs=1e-9)
    np.testing.assert_allclose(res.coefficients[1:], 0, atol=1e-9)
    assert res.r_squared == pytest.approx(1.0)


def test_baseline_identical_years_is_constant_column(rng):
    row = rng.uniform(1, 2, len(SMALL))
    with pytest.raises(ConstantColumnError):
        run_baseline_regression(demand_series(np.tile(row, (6, 1))), SMALL)


def test_baseline_flags_engineered_collinearity(rng):
    D = rng.uniform(50, 150, (15, len(SMALL)))
    D[:, 3] = 3 * D[:, 2]
    res = quiet(run_baseline_regression, demand_series(D), SMALL)
    assert res.multicollinear
    assert np.isinf(res.vifs[0]) and np.isinf(res.vifs[3])


def test_baseline_too_few_observations(rng):
    with pytest.raises(InsufficientObservationsError) as info:
        run_baseline_regression(demand_series(rng.uniform(1, 2, (5, len(SMALL)))), SMALL)
    assert "m=5" in str(info.value) and "p=4" in str(info.value)


def test_degrees_of_freedom_warning(rng):
    with pytest.warns(DegreesOfFreedomWarning):
        run_baseline_regression(demand_series(rng.uniform(1, 2, (12, len(SMALL)))), SMALL)


def test_zero_noise_recovers_generator(taxonomy):
    s = synthetic_series(taxonomy, noise=0.0, seed=0)
    pca, sel, model = quiet(run_pca_model_build, s, taxonomy)
    assert pca.retained == 4
    assert sel.variables == ("C18", "C13-15", "B")
    assert model.predictors == ("energy", "waste", "communication", "water", "C18", "C13-15", "B")
    np.testing.assert_allclose(model.coefficients, PUBLISHED_COEFFICIENTS, rtol=1e-6)
    assert model.intercept == pytest.approx(PUBLISHED_INTERCEPT, abs=1e-3)
    assert model.m == 15 and model.provenance == "fitted"


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_small_noise_keeps_fit(taxonomy, seed):
    s = synthetic_series(taxonomy, noise=0.01, seed=seed)
    _, _, model = quiet(run_pca_model_build, s, taxonomy)
    assert model.r_squared >= 0.99


def test_stage_composability(taxonomy):
    s = synthetic_series(taxonomy, noise=0.01, seed=4)
    a = quiet(run_pca_model_build, s, taxonomy)
    b = quiet(run_pca_model_build, s, taxonomy, panel=build_panel(s, taxonomy))
    assert a[2] == b[2]
    np.testing.assert_array_equal(a[0].loadings, b[0].loadings)


def test_pooled_panel(taxonomy):
    s1 = synthetic_series(taxonomy, noise=0.01, seed=0, region="R1")
    s2 = synthetic_series(taxonomy, noise=0.01, seed=1, region="R2")
    panel = build_panel([s1, s2], taxonomy)
    assert len(panel.observations) == 30
    assert panel.observations[15] == ("R2", 2000)
    _, _, model = quiet(run_pca_model_build, [s1, s2], taxonomy)
    assert model.m == 30


def test_demand_definitions(taxonomy):
    s = synthetic_series(taxonomy, years=range(2000, 2006))
    a = build_panel(s, taxonomy, "row_total")
    b = build_panel(s, taxonomy, "total_output")
    # synthetic tables are balanced, so both definitions agree
    np.testing.assert_allclose(a.values, b.values, rtol=1e-12)


def test_published_model_predictions():
    model = published_model()
    assert model.provenance == PUBLISHED_FIXTURE == "paper-fixture"
    assert predict(model, np.zeros(7)) == pytest.approx(30507.785)
    assert predict(model, [1, 0, 0, 0, 0, 0, 0]) == pytest.approx(30507.785 + 1.299)
    a, b = np.arange(7.0), np.linspace(-3, 5, 7)
    assert predict(model, a) + predict(model, b) - model.intercept == pytest.approx(predict(model, a + b))


@pytest.mark.parametrize("bad", [np.zeros(6), [0, 0, 0, 0, 0, 0, np.nan], [0, 0, 0, 0, 0, 0, np.inf]])
def test_predict_rejects_bad_inputs(bad):
    with pytest.raises(ModelInputError):
        predict(published_model(), bad)


def test_model_json_round_trip(tmp_path, taxonomy):
    _, _, model = quiet(run_pca_model_build, synthetic_series(taxonomy, noise=0.01), taxonomy)
    for m in (model, published_model(), LinearModel(("a", "b"), (1.0, 2.0), 3.0, vifs=(np.inf, 2.0))):
        m.save(tmp_path / "m.json")
        back = LinearModel.load(tmp_path / "m.json")
        assert back == m
        assert back.to_dict() == m.to_dict()


@pytest.fixture
def synthetic_config(tmp_path):
    return PipelineConfig(data=(DataSource(str(data_path("synthetic_uk.csv"))),),
                          output_dir=str(tmp_path / "report"))


def bundle_bytes(path):
    out = {}
    for f in sorted(os.listdir(path)):
        data = (path / f).read_bytes()
        if f == "manifest.json":
            d = json.loads(data)
            d.pop("timestamp")
            data = json.dumps(d, sort_keys=True).encode()
        out[f] = data
    return out


def test_report_determinism(tmp_path, synthetic_config):
    emit_report(run_all(synthetic_config), tmp_path / "a")
    emit_report(run_all(synthetic_config), tmp_path / "b")
    a, b = bundle_bytes(tmp_path / "a"), bundle_bytes(tmp_path / "b")
    assert a == b
    assert {"variance_table.csv", "interdependency_map.csv", "model.json", "manifest.json"} <= set(a)
    diff = json.loads(a["interdependency_diff.json"])
    assert diff == {"differences_vs_published": []}


def test_report_contents(tmp_path, synthetic_config):
    res = run_all(synthetic_config)
    digests = emit_report(res, tmp_path / "r", timestamp="fixed")
    manifest = json.loads((tmp_path / "r" / "manifest.json").read_text())
    assert manifest["timestamp"] == "fixed"
    assert manifest["files"] == digests
    assert manifest["config_sha256"] == synthetic_config.digest()
    assert manifest["observations"] == 15
    assert any("DegreesOfFreedomWarning" in n for n in manifest["notes"])
    model = json.loads((tmp_path / "r" / "model.json").read_text())
    assert model["m"] == 15 and model["p"] == 7 and model["units"] == "table units"


def test_unwritable_output_dir(tmp_path, synthetic_config):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(ReportIOError):
        emit_report(fixture_results(), blocker / "sub")
    with pytest.raises(ReportIOError):
        emit_report(fixture_results(), blocker)
    assert blocker.read_text() == "x"


def test_fixture_variance_table(tmp_path):
    emit_report(fixture_results(), tmp_path)
    lines = (tmp_path / "variance_table.csv").read_text().splitlines()
    cum = [float(l.split(",")[3]) for l in lines[1:5]]
    np.testing.assert_allclose(cum, [67.241, 81.587, 90.695, 93.537], atol=0.01)
    assert lines[1].split(",")[9] == "59.363"
    assert lines[4].split(",")[9] == lines[4].split(",")[6]


def test_config_loading(tmp_path, monkeypatch):
    d = tmp_path / "cfg"
    d.mkdir()
    s = synthetic_series(years=range(2000, 2006))
    write_canonical(s, d / "local.csv")
    cfg_path = d / "config.json"
    cfg_path.write_text(json.dumps({
        "data": ["local.csv", {"path": "elsewhere.csv", "region": "FR"}],
        "year_range": [2000, 2005],
        "ras": {"tolerance": 1e-8},
        "retention": "fixed:3",
    }))
    monkeypatch.setenv(DATA_DIR_ENV, "/data/io")
    cfg = PipelineConfig.load(cfg_path)
    assert cfg.data[0].path == str(d / "local.csv")
    assert cfg.data[1] == DataSource("/data/io/elsewhere.csv", "canonical-long", "FR")
    assert cfg.year_range == (2000, 2005)
    assert cfg.ras.tolerance == 1e-8
    assert PipelineConfig.from_dict(cfg.to_dict()) == cfg
    assert cfg.digest() == PipelineConfig.from_dict(cfg.to_dict()).digest()


@pytest.mark.parametrize("bad", [dict(year_range=(2014, 2000)), dict(demand="gross"),
                                 dict(retention="scree")])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        PipelineConfig(**bad)
