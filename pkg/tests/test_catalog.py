import numpy as np
import pytest

from bougerol.paths import Path, TimeGrid
from bougerol.stochastic import StreamKey
from bougerol.verify import CATALOG, RunSettings, UnknownScenario, run_scenario, run_suite
from bougerol.verify import catalog
from bougerol.verify.runner import overall_verdict, StatEntry


# --- projections --------------------------------------------------------------


def test_finite_projection_layout():
    g = TimeGrid(1.0, 64)
    p = Path(g, np.tile(g.times, (3, 1)))
    proj = catalog.finite_projection(p)
    assert proj.shape == (3, 10)
    expected = [(2 * k - 1) / 16 for k in range(1, 9)] + [1.0]
    assert np.allclose(proj[0, :9], expected)
    assert np.allclose(proj[0, 9], np.log((np.exp(2) - 1) / 2), rtol=1e-3)


def test_horizon_projection_needs_fine_grid():
    with pytest.raises(ValueError):
        catalog.horizon_indices(TimeGrid(20.0, 128))
    idx = catalog.horizon_indices(TimeGrid(20.0, 1024))
    assert idx[-1] == 1024 and len(idx) == 9


# --- coupling: the shift is built from the path it transforms -------------------


class Recorder:
    def __init__(self, monkeypatch):
        self.paths, self.transformed = [], []
        real_bm, real_tz = catalog.sample_bm, catalog.transform_tz

        def bm(*a, **k):
            p = real_bm(*a, **k)
            self.paths.append(p)
            return p

        def tz(path, z):
            self.transformed.append(path)
            return real_tz(path, z)

        monkeypatch.setattr(catalog, "sample_bm", bm)
        monkeypatch.setattr(catalog, "transform_tz", tz)


@pytest.mark.parametrize("gen,kwargs", [
    (catalog.gen_tmain1, {"x": 0.7}),
    (catalog.gen_id1_transformed, {"x": 0.5}),
    (catalog.gen_id2_negzeta, {"x": 0.5}),
    (catalog.gen_tmain2_plain, {"zs": [-1.0, 0.5]}),
    (catalog.gen_tmain2_weighted, {"zs": [-1.0, 0.5]}),
    (catalog.gen_tmain3_lhs, {}),
])
def test_one_path_draw_per_batch(monkeypatch, gen, kwargs):
    rec = Recorder(monkeypatch)
    gen(StreamKey(1, "coupling").generator(), 64, grid=TimeGrid(1.0, 64), **kwargs)
    assert len(rec.paths) == 1
    assert rec.transformed and all(p is rec.paths[0] for p in rec.transformed)


def test_tmain1_shift_matches_its_own_path():
    g = TimeGrid(1.0, 64)
    rng = StreamKey(2, "shift").generator()
    out = catalog.gen_tmain1(rng, 200, grid=g, x=0.0)
    # the transformed path ends at B_t - z = argsh(beta(A_t)); its law is that of B_t
    end = out["proj"][:, 8]
    assert np.all(np.isfinite(end)) and np.all(np.isfinite(out["z"]))


# --- scenario resolution --------------------------------------------------------


def test_catalog_has_seventeen_entries():
    assert len(CATALOG) == 17
    assert list(CATALOG)[0] == "bougerol"


def test_resolve_defaults_and_overrides():
    sc = CATALOG["bougerol_general"]
    assert sc.resolve() == {"t": 1.0, "x": [0.5, -1.0]}
    assert sc.resolve({"x": 2.0}) == {"t": 1.0, "x": [2.0]}
    # irrelevant overrides are ignored
    assert "mu" not in sc.resolve({"mu": 3.0})
    with pytest.raises(ValueError):
        sc.resolve({"t": -1.0})
    with pytest.raises(ValueError):
        CATALOG["myopp"].resolve({"mu": 0.0})


def test_small_transient_drift_rejected():
    with pytest.raises(ValueError, match="mu >= 0.5"):
        run_scenario("dufresne", RunSettings(seed=1, samples=1000, grid=256, overrides={"mu": 0.3}))


def test_unknown_scenario():
    with pytest.raises(UnknownScenario):
        run_scenario("nope", RunSettings(seed=1))


def test_overall_verdict_ordering():
    e = lambda v: StatEntry("n", "ks", 0.0, 1.0, v)
    assert overall_verdict([e("pass"), e("low-power")]) == "low-power"
    assert overall_verdict([e("low-power"), e("fail")]) == "fail"
    assert overall_verdict([e("pass")]) == "pass"


# --- reports ------------------------------------------------------------------------


def small(seed=3, **kw):
    return RunSettings(seed=seed, samples=2000, grid=64, **kw)


def test_report_fields():
    r = run_scenario("bougerol", small())
    d = r.to_dict()
    assert d["schema_version"] == 1 and d["scenario"] == "bougerol"
    assert d["samples"] == {"beta_of_A": 2000, "sinh_B": 2000}
    assert [s["method"] for s in d["statistics"]] == ["ks", "weighted_mean"]
    assert d["statistics"][0]["details"]["holm_tests"] == 1
    assert r.verdict in ("pass", "low-power", "fail")


def test_worker_count_does_not_change_reports():
    texts = {w: run_scenario("tmain1", small(workers=w, batch_size=256)).to_json(mask_wall_time=True)
             for w in (1, 2, 8)}
    assert texts[1] == texts[2] == texts[8]


def test_seed_changes_draws():
    a = run_scenario("bougerol", small(seed=1)).entry("beta(A_t) vs sinh(B_t)").statistic
    b = run_scenario("bougerol", small(seed=2)).entry("beta(A_t) vs sinh(B_t)").statistic
    assert a != b


def test_suite_applies_holm_across_reports():
    reports = run_suite(["bougerol", "boug_variant"], small())
    tests = [e for r in reports for e in r.statistics if e.method == "ks"]
    assert all(e.details["holm_tests"] == len(tests) for e in tests)


def test_transient_scenario_reports_tail():
    r = run_scenario("dufresne", RunSettings(seed=4, samples=1000, grid=256))
    assert set(r.tail) == {"horizon", "tolerance", "max_last_tenth_share", "paths_extended",
                           "max_extensions", "converged"}
    assert r.tail["horizon"] == 15.0


# --- detection power: a drift of +0.1 in one ensemble is caught -----------------------


def _drifted(gen):
    def wrapped(rng, size, **kw):
        kw["drift"] = kw.get("drift", 0.0) + 0.1
        return gen(rng, size, **kw)
    return wrapped


@pytest.mark.slow
def test_ks_detects_corrupted_ensemble(monkeypatch):
    monkeypatch.setattr(catalog, "gen_endpoint", _drifted(catalog.gen_endpoint))
    r = run_scenario("bougerol", RunSettings(seed=5, grid=256))
    assert r.entry("beta(A_t) vs sinh(B_t)").p_value < 1e-3


@pytest.mark.slow
def test_energy_detects_corrupted_ensemble(monkeypatch):
    monkeypatch.setattr(catalog, "gen_bm_projection", _drifted(catalog.gen_bm_projection))
    r = run_scenario("myopp", RunSettings(seed=5, grid=256))
    assert r.statistics[0].p_value < 1e-3


@pytest.mark.slow
def test_weighted_detects_corrupted_ensemble(monkeypatch):
    monkeypatch.setattr(catalog, "gen_beta_of_a", _drifted(catalog.gen_beta_of_a))
    r = run_scenario("bougerol", RunSettings(seed=5, grid=256))
    assert r.entry("Var beta(A_t) = E A_t").p_value < 1e-3
