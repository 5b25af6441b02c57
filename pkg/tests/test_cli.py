import json
import math

import pytest

from conftest import atmospheric, mechanical
from parares import cli, scenarios
from parares.scenarios import CSV_HEADER, SCENARIO_NAMES, Scenario, get_scenario, run


# -- registry and serialisation ------------------------------------------------------

def test_registry_names():
    assert set(SCENARIO_NAMES) == {
        "fig2_0_1", "fig2_0_2a", "fig2_0_2b", "fig2_0_2c", "fig2_0_3",
        "fig2_0_4", "fig2_0_5", "fig2_0_6", "fig2_0_7",
    }


@pytest.mark.parametrize("name", SCENARIO_NAMES)
def test_config_round_trip_is_fixed_point(name):
    text = json.dumps(get_scenario(name).to_dict(), sort_keys=True)
    again = json.dumps(Scenario.from_dict(json.loads(text)).to_dict(), sort_keys=True)
    assert again == text


def test_registry_parameters():
    for name in SCENARIO_NAMES:
        s = get_scenario(name)
        assert s.model["k"] == 3 and s.model["eps"] == 2.5e-4
        assert s.sample_dt == 0.5
        assert s.t_end == (1e4 if name in ("fig2_0_6", "fig2_0_7") else 2e4)
    assert get_scenario("fig2_0_4").model["beta"] == 0.3
    assert [get_scenario(f"fig2_0_2{t}").model["c"] for t in "abc"] == [0.1, 0.01, 1e-4]
    assert len(get_scenario("fig2_0_5").initial) == 3


def test_get_scenario_returns_copy():
    s = get_scenario("fig2_0_4")
    s.model["c"] = 99.0
    assert get_scenario("fig2_0_4").model["c"] == 0.24


def test_unknown_scenario():
    with pytest.raises(KeyError):
        get_scenario("fig9")
    assert cli.main(["scenario", "fig9"]) == 2


def test_format_version_checked():
    d = get_scenario("fig2_0_4").to_dict()
    d["format_version"] = 99
    with pytest.raises(ValueError):
        Scenario.from_dict(d)


def test_physical_initial_state():
    s = get_scenario("fig2_0_4")
    p = scenarios.initial_state(s.initial[0], s.build_model())
    assert p.D == pytest.approx(1.48, abs=1e-12)
    assert p.theta == 0.0


def test_model_spec_round_trip():
    for m in (atmospheric(beta=0.3, c=0.1, eps=1e-3), mechanical(b=0.5, a2=0.1)):
        assert scenarios.build_model(scenarios.model_spec(m)) == m


# -- scenario runs ------------------------------------------------------------------

def test_scenario_report_parabolic_context():
    res = scenarios.run_scenario("fig2_0_4", t_end=100.0)
    assert res.context["resonance_class"] == "parabolic"
    assert res.context["abs_D0_minus_Dp"] <= 1e-2
    rep = res.report()
    assert rep["format_version"] == scenarios.FORMAT_VERSION
    assert rep["passed"] is res.passed
    json.dumps(rep)


def test_scenario_csv_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert cli.main(["scenario", "fig2_0_4", "--t-end", "50", "--out", str(tmp_path / d)]) == 0
    a = (tmp_path / "a" / "fig2_0_4_traj0.csv").read_bytes()
    b = (tmp_path / "b" / "fig2_0_4_traj0.csv").read_bytes()
    assert a == b
    lines = a.decode().splitlines()
    assert lines[0].startswith("# format_version=1")
    assert lines[1] == ",".join(CSV_HEADER)
    assert len(lines) == 2 + 101
    report = json.loads((tmp_path / "a" / "fig2_0_4_report.json").read_text())
    assert report["context"]["resonance_class"] == "parabolic"


def test_failed_assertion_exit_code():
    # too short for the instability to develop
    assert cli.main(["scenario", "fig2_0_2c", "--t-end", "20"]) == 1


def test_simulate_drift_abort_exit_code(tmp_path, capsys):
    cfg = get_scenario("fig2_0_4").to_dict()
    cfg["t_end"] = 50.0
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg))
    assert cli.main(["simulate", "--config", str(path)]) == 0
    assert cli.main(["simulate", "--config", str(path), "--tol", "1e-2"]) in (0, 1)
    capsys.readouterr()
    # an impossible drift budget always aborts
    res = run(Scenario.from_dict(cfg), drift_abort=1e-16)
    assert not res.passed
    assert res.metrics[0]["status"] == "aborted-drift"


def test_simulate_from_flags(capsys):
    assert cli.main(["simulate", "--kind", "mechanical", "--b", "0.5", "--eps", "1e-3",
                     "--phi", "0.2", "--D", "1.1", "--t-end", "20"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["trajectories"][0]["status"] == "completed"
    assert out["scenario"]["model"]["kind"] == "mechanical"


# -- sweeps -------------------------------------------------------------------------

def test_c_sweep_matches_individual_runs():
    base = get_scenario("fig2_0_2a").to_dict()
    kw = {"t_end": 200.0}
    rows = cli.sweep("simulate", base, {"c": [0.1, 0.01, 0.0001]}, kw)
    assert [r["c"] for r in rows] == [0.1, 0.01, 0.0001]
    for row, tag in zip(rows, "abc"):
        ind = scenarios.run_scenario(f"fig2_0_2{tag}", **kw).metrics[0]
        for key in ("max_latitude", "jumps", "max_dwell", "h_drift", "d_drift", "status"):
            assert row[key] == ind[key]


def test_parallel_sweep_keeps_grid_order():
    base = get_scenario("fig2_0_2a").to_dict()
    grid = {"c": [0.1, 0.01, 0.0001]}
    serial = cli.sweep("simulate", base, grid, {"t_end": 100.0})
    parallel = cli.sweep("simulate", base, grid, {"t_end": 100.0}, jobs=3)
    assert serial == parallel


def test_loci_sweep():
    rows = cli.sweep("loci", {"kind": "atmospheric", "k": 3}, {"beta": [0.0, 0.03, 0.3]})
    for row, d_p in zip(rows, (1.0, 1.058, 1.4832)):
        assert row["D_p"] == pytest.approx(d_p, abs=1e-3)


def test_island_width_sweep():
    rows = cli.sweep("island-width", {"kind": "atmospheric", "k": 3}, {"eps": [1e-5, 1e-4, 1e-3]})
    w = [r["measured_width"] for r in rows]
    assert w[1] / w[0] == pytest.approx(math.sqrt(10), rel=0.03)
    assert w[2] / w[0] == pytest.approx(10, rel=0.03)


def test_sweep_records_point_failures():
    rows = cli.sweep("loci", {"kind": "atmospheric"}, {"beta": [0.3, -1.0]})
    assert "error" not in rows[0]
    assert rows[1]["error"].startswith("ValueError")


def test_grid_values():
    assert cli._grid_values([1, 2]) == [1.0, 2.0]
    assert cli._grid_values({"start": 1e-5, "stop": 1e-3, "num": 3, "scale": "log"}) == pytest.approx(
        [1e-5, 1e-4, 1e-3])
    assert cli._grid_values({"start": 0, "stop": 1, "num": 3}) == [0.0, 0.5, 1.0]


def test_sweep_command_writes_files(tmp_path):
    code = cli.main(["sweep", "--measure", "loci", "--param", "beta", "--values", "0,0.03,0.3",
                     "--out", str(tmp_path)])
    assert code == 0
    data = json.loads((tmp_path / "sweep.json").read_text())
    assert [r["beta"] for r in data["rows"]] == [0.0, 0.03, 0.3]
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "# format_version=1"
    assert lines[1].split(",")[:2] == ["beta", "D_p"]


# -- analyze ----------------------------------------------------------------------

def test_analyze_flat_atmospheric():
    rep = cli.analyze(atmospheric())
    pr = rep["parabolic_resonance"]
    assert pr["type"] == "flat-parabolic"
    assert (pr["D"], pr["c"]) == pytest.approx((1.0, 0.0), abs=1e-8)
    assert "travelling-wave" in rep["structure"]["classes"]
    assert rep["hyperbolic_resonance_curve"]["hyperbolic_for"] == "c < c_p"
    json.dumps(rep, default=cli._json_default)


def test_analyze_flat_mechanical():
    rep = cli.analyze(mechanical(b=0.0))
    assert rep["parabolic_resonance"]["type"] == "flat-parabolic"
    assert (rep["parabolic_resonance"]["D"], rep["parabolic_resonance"]["c"]) == pytest.approx((1, 0), abs=1e-8)


def test_analyze_detuned_mechanical():
    rep = cli.analyze(mechanical(b=0.5))
    assert rep["parabolic_resonance"]["type"] == "parabolic"
    assert rep["loci"]["d_r"] == {"intercept": 1.0, "slope": 1.0}
    assert rep["hyperbolic_resonance_curve"]["hyperbolic_for"] == "c > c_p"


def test_analyze_command(tmp_path, capsys):
    assert cli.main(["analyze", "--kind", "atmospheric", "--beta", "0.3", "--out", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    assert "parabolic" in text and "1.483239697" in text
    data = json.loads((tmp_path / "analysis.json").read_text())
    assert data["format_version"] == 1


def test_island_width_command(capsys):
    assert cli.main(["island-width", "--c", "0.24", "--beta", "0.3", "--eps", "2.5e-4"]) == 0
    assert "D_r = 1.48" in capsys.readouterr().out


def test_scenario_list(capsys):
    assert cli.main(["scenario", "--list"]) == 0
    assert capsys.readouterr().out.count("fig2_0_") == len(SCENARIO_NAMES)
