import io
import json
import math
import pathlib
from importlib import resources

import jsonschema
import pytest

from bougerol.cli import main

GOLDEN = pathlib.Path(__file__).parent / "golden" / "bougerol_seed42_small.json"
SMALL = ["--samples", "2000", "--grid", "64"]


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def schema():
    return json.loads(resources.files("bougerol").joinpath("report_schema.json").read_text())


@pytest.fixture(autouse=True)
def no_env_seed(monkeypatch):
    monkeypatch.delenv("BOUGEROL_SEED", raising=False)


# --- list ---------------------------------------------------------------------------


def test_list_plain():
    code, text = run(["list"])
    lines = text.strip().splitlines()
    assert code == 0 and len(lines) == 17
    assert lines[0].startswith("bougerol\t") and "sinh(B_t)" in lines[0]


def test_list_json():
    code, text = run(["list", "--json"])
    rows = json.loads(text)
    assert code == 0 and len(rows) == 17
    assert {"id", "identity", "defaults", "default_samples"} <= set(rows[0])


# --- exit codes ------------------------------------------------------------------------


def test_unknown_scenario_exits_1(capsys):
    code, _ = run(["run", "--scenario", "nope", "--seed", "1"])
    assert code == 1
    assert "unknown scenario 'nope'" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["run", "--scenario", "bougerol"],                                   # no seed
    ["run", "--scenario", "bougerol", "--seed", "1", "--samples", "999"],
    ["run", "--scenario", "bougerol", "--seed", "1", "--grid", "100"],
    ["run", "--scenario", "bougerol", "--seed", "1", "--level", "1.5"],
    ["run", "--seed", "1"],                                              # no scenario
    ["run", "--scenario", "bougerol", "--seed", "x"],
    ["density", "--law", "weibull"],
    ["frobnicate"],
])
def test_usage_errors_exit_1(argv):
    assert run(argv)[0] == 1


def test_runtime_error_exits_1():
    code, _ = run(["run", "--scenario", "dufresne", "--mu", "0.2", "--seed", "1", *SMALL])
    assert code == 1


def test_pass_exits_0_and_validates(tmp_path):
    out = tmp_path / "r.json"
    code, _ = run(["run", "--scenario", "bougerol", "--t", "1", "--seed", "42", "--out", str(out), *SMALL])
    report = json.loads(out.read_text())
    jsonschema.validate(report, schema())
    assert code == 0 and report["verdict"] == "pass"


def test_default_size_run(tmp_path):
    out = tmp_path / "r.json"
    code, _ = run(["run", "--scenario", "bougerol", "--t", "1", "--samples", "100000", "--seed", "42",
                   "--out", str(out)])
    assert code == 0
    jsonschema.validate(json.loads(out.read_text()), schema())


def test_statistical_failure_exits_2():
    # at level 0.999 a null KS p-value is almost surely below the level
    code, text = run(["run", "--scenario", "bougerol", "--seed", "42", "--level", "0.999", *SMALL])
    assert code == 2 and json.loads(text)["verdict"] == "fail"


# --- reports ------------------------------------------------------------------------------


def _masked(text):
    d = json.loads(text)
    for r in d if isinstance(d, list) else [d]:
        r["wall_ms"] = None
    return d


def test_golden_report():
    code, text = run(["run", "--scenario", "bougerol", "--seed", "42", *SMALL])
    assert code == 0
    assert _masked(text) == json.loads(GOLDEN.read_text())


def test_reruns_byte_identical_except_wall_time(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        run(["run", "--scenario", "bougerol", "--seed", "42", "--out", str(path), *SMALL])
    strip = lambda p: [l for l in p.read_text().splitlines() if '"wall_ms"' not in l]
    assert strip(a) == strip(b)


def test_workers_identical():
    texts = [json.dumps(_masked(run(["run", "--scenario", "bougerol_general", "--seed", "7", "--workers", w,
                                     *SMALL])[1])) for w in ("1", "2", "8")]
    assert texts[0] == texts[1] == texts[2]


def test_suite_is_an_array_and_validates():
    code, text = run(["run", "--scenario", "bougerol,boug_variant", "--seed", "3", *SMALL])
    reports = json.loads(text)
    assert code == 0 and [r["scenario"] for r in reports] == ["bougerol", "boug_variant"]
    for r in reports:
        jsonschema.validate(r, schema())


def test_overrides_reach_parameters():
    _, text = run(["run", "--scenario", "bougerol_general", "--x", "0.25,2", "--t", "0.5", "--seed", "3", *SMALL])
    r = json.loads(text)
    assert r["parameters"] == {"t": 0.5, "x": [0.25, 2.0]}
    assert [s["name"] for s in r["statistics"]] == ["x=0.25", "x=2"]


# --- configuration -------------------------------------------------------------------------


def test_config_file_and_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# suite settings\nscenario = bougerol\nseed = 11\nsamples = 2000\ngrid = 64\n")
    _, from_file = run(["run", "--config", str(cfg)])
    assert json.loads(from_file)["seed"] == 11
    _, flagged = run(["run", "--config", str(cfg), "--seed", "12"])
    r = json.loads(flagged)
    assert r["seed"] == 12 and r["grid_steps"] == 64


def test_bad_config_exits_1(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert run(["run", "--config", str(cfg)])[0] == 1
    assert run(["run", "--config", str(tmp_path / "missing.cfg")])[0] == 1


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("BOUGEROL_SEED", "42")
    code, text = run(["run", "--scenario", "bougerol", *SMALL])
    assert code == 0 and json.loads(text)["seed"] == 42
    monkeypatch.setenv("BOUGEROL_SEED", "forty-two")
    assert run(["run", "--scenario", "bougerol", *SMALL])[0] == 1


def test_ecdf_dump(tmp_path):
    path = tmp_path / "ecdf.csv"
    run(["run", "--scenario", "bougerol", "--seed", "1", "--dump-ecdf", str(path), *SMALL])
    lines = path.read_text().splitlines()
    assert lines[0] == "scenario,statistic,ensemble,value,ecdf"
    assert len(lines) == 1 + 2 * 2000
    rows = [l.split(",") for l in lines[1:]]
    assert {r[2] for r in rows} == {"lhs", "rhs"}
    lhs = [float(r[4]) for r in rows if r[2] == "lhs"]
    assert lhs[-1] == 1.0 and all(a < b for a, b in zip(lhs, lhs[1:]))


# --- density ---------------------------------------------------------------------------------


def _table(text):
    rows = [l.split(",") for l in text.splitlines() if not l.startswith("#")][1:]
    return [(float(r[0]), float(r[1])) for r in rows]


def test_density_a_t_normalizes_with_tail():
    code, text = run(["density", "--law", "a_t", "--t", "1", "--range", "0.05:20", "--points", "400"])
    assert code == 0
    assert len(_table(text)) == 400
    header = text.splitlines()[1]
    total = float(header.split("total=")[1])
    assert abs(total - 1) <= 1e-3


def test_density_conditional_endpoint_at_zero():
    _, text = run(["density", "--law", "conditional_endpoint", "--u", "1"])
    value = dict(_table(text))[0.0]
    assert abs(value - 0.4368860899246877) <= 1e-9


def test_density_first_passage_at_one(tmp_path):
    out = tmp_path / "fp.csv"
    code, _ = run(["density", "--law", "first_passage", "--level", "1", "--mu", "0", "--points", "100",
                   "--out", str(out)])
    table = _table(out.read_text())
    assert code == 0 and len(table) == 100
    x, f = min(table, key=lambda r: abs(r[0] - 1.0))
    assert abs(x - 1.0) <= 1e-12
    assert abs(f - math.exp(-0.5) / math.sqrt(2 * math.pi)) <= 1e-9


def test_density_rejects_nonpositive_range():
    assert run(["density", "--law", "a_t", "--range", "-1:2"])[0] == 1
    assert run(["density", "--law", "a_t", "--range", "2:1"])[0] == 1
