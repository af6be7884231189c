import json
import math
import os
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from polyplant import PairedSeries, PolyMap, eval_map, nrmsre, rolling_mean
from polyplant.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
PLANT = str(CONFIGS / "plant.json")


def _idle_scenario_file(directory: Path) -> str:
    """A fast all-off run: 300 s of nothing happening."""
    data = json.loads((CONFIGS / "scenario_wep.json").read_text())
    data.update(t_init_htes=20.0, t_init_ctes=20.0, t_amb=20.0,
                p_load_h=0.0, horizon_s=300.0)
    data["switches"] = {"chp": 0}
    path = directory / "idle.json"
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture(scope="module")
def sim_dir(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli")
    scenario = _idle_scenario_file(base)
    out = base / "run"
    assert main(["simulate", "--plant", PLANT, "--scenario", scenario,
                 "--out", str(out)]) == 0
    return base, scenario, out


def test_simulate_outputs(sim_dir):
    _, _, out = sim_dir
    csv_text = (out / "simlog.csv").read_text()
    lines = csv_text.splitlines()
    assert lines[0].startswith("time_s,HTES_T_1,")
    assert len(lines) == 7  # header + rows at 0..300 s
    assert lines[1].startswith("0,20,")
    assert lines[-1].startswith("300,")

    summary = json.loads((out / "summary.json").read_text())
    assert list(summary) == ["mode", "termination_time_s",
                             "termination_reason", "records", "energy_audit"]
    assert summary["mode"] == "WEP"
    assert summary["termination_reason"] == "horizon"
    assert summary["records"] == 6
    assert set(summary["energy_audit"]) == {"htes", "ctes"}


def test_simulate_repeat_is_byte_identical(sim_dir):
    base, scenario, out = sim_dir
    out2 = base / "run2"
    assert main(["simulate", "--plant", PLANT, "--scenario", scenario,
                 "--out", str(out2)]) == 0
    for name in ("simlog.csv", "summary.json"):
        assert (out / name).read_bytes() == (out2 / name).read_bytes()


def test_missing_plant_file_exit_1(tmp_path):
    scenario = _idle_scenario_file(tmp_path)
    code = main(["simulate", "--plant", str(tmp_path / "nope.json"),
                 "--scenario", scenario, "--out", str(tmp_path / "o")])
    assert code == 1


def test_bad_dt_exit_1(tmp_path):
    data = json.loads(Path(_idle_scenario_file(tmp_path)).read_text())
    data["dt_s"] = 7.0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    assert main(["simulate", "--plant", PLANT, "--scenario", str(bad),
                 "--out", str(tmp_path / "o")]) == 1


def test_cold_tank_feed_exit_2(tmp_path):
    # a 20 degC hot tank cannot hold a 35 degC heating feed
    data = json.loads(Path(_idle_scenario_file(tmp_path)).read_text())
    data["p_load_h"] = 500.0
    bad = tmp_path / "starved.json"
    bad.write_text(json.dumps(data))
    assert main(["simulate", "--plant", PLANT, "--scenario", str(bad),
                 "--out", str(tmp_path / "o")]) == 2


def test_usage_errors_exit_1(tmp_path):
    assert main([]) == 1
    assert main(["simulate"]) == 1
    assert main(["fit", "--samples", "x.csv", "--kind", "bogus",
                 "--out", str(tmp_path / "f.json")]) == 1


def test_fit_map2_round_trip(tmp_path):
    coeffs = (50.0, 2.0, -1.0, 0.1, 0.05, 0.02)
    poly = PolyMap(n_vars=2, coeffs=coeffs)
    rows = ["t_in,t_out,p"]
    for a in range(5):
        for b in range(5):
            rows.append(f"{a},{b},{eval_map(poly, (a, b))!r}")
    samples = tmp_path / "samples.csv"
    samples.write_text("\n".join(rows) + "\n")
    out = tmp_path / "fit.json"
    assert main(["fit", "--samples", str(samples), "--kind", "map2",
                 "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["kind"] == "map2"
    assert payload["inputs"] == ["t_in", "t_out"]
    assert payload["output"] == "p"
    assert payload["normalized"] is True
    assert len(payload["basis"]) == 6
    assert np.allclose(payload["coefficients"], coeffs, atol=1e-8)
    assert payload["objective"] < 1e-12


def test_fit_step_round_trip(tmp_path):
    k, tau, u = 3.0, 100.0, 2.0
    rows = ["time_s,value"]
    for t in range(0, 610, 10):
        rows.append(f"{t},{k * u * (1.0 - math.exp(-t / tau))!r}")
    samples = tmp_path / "step.csv"
    samples.write_text("\n".join(rows) + "\n")
    out = tmp_path / "step.json"
    assert main(["fit", "--samples", str(samples), "--kind", "step",
                 "--out", str(out), "--step-input", "2.0"]) == 0
    payload = json.loads(out.read_text())
    assert payload["kind"] == "step"
    assert math.isclose(payload["gain"], k, rel_tol=1e-3)
    assert math.isclose(payload["time_constant_s"], tau, rel_tol=1e-3)
    assert payload["indeterminate"] is False


def test_fit_wrong_column_count_exit_1(tmp_path):
    samples = tmp_path / "samples.csv"
    samples.write_text("a,b\n1,2\n3,4\n")
    assert main(["fit", "--samples", str(samples), "--kind", "map2",
                 "--out", str(tmp_path / "f.json")]) == 1


def test_fit_non_numeric_exit_1(tmp_path):
    samples = tmp_path / "samples.csv"
    samples.write_text("a,b,c\n1,2,x\n")
    assert main(["fit", "--samples", str(samples), "--kind", "map2",
                 "--out", str(tmp_path / "f.json")]) == 1


def _validation_files(tmp_path):
    t = np.arange(0.0, 601.0, 60.0)
    y = np.linspace(10.0, 20.0, t.size)
    measured = tmp_path / "measured.csv"
    lines = ["time_s,T_x,T_const"]
    for ti, yi in zip(t, y):
        lines.append(f"{float(ti)!r},{float(yi)!r},5.0")
    measured.write_text("\n".join(lines) + "\n")
    sim = tmp_path / "sim.csv"
    lines = ["time_s,T_x,T_const"]
    for ti, yi in zip(t, y + 0.5):
        lines.append(f"{float(ti)!r},{float(yi)!r},5.0")
    sim.write_text("\n".join(lines) + "\n")
    return measured, sim, t, y


def test_validate_report(tmp_path):
    measured, sim, _, y = _validation_files(tmp_path)
    out = tmp_path / "report.json"
    assert main(["validate", "--measured", str(measured), "--simlog", str(sim),
                 "--channels", "T_x,T_const", "--out", str(out)]) == 0
    report = json.loads(out.read_text())["channels"]
    want = nrmsre(PairedSeries(y=y, y_star=y + 0.5))
    assert math.isclose(report["T_x"]["nrmsre"], want, rel_tol=1e-12)
    assert math.isclose(report["T_x"]["r_squared"], 1.0)
    assert "undefined" in report["T_const"]


def test_validate_rolling_mean(tmp_path):
    measured, sim, _, y = _validation_files(tmp_path)
    out = tmp_path / "report.json"
    assert main(["validate", "--measured", str(measured), "--simlog", str(sim),
                 "--channels", "T_x", "--out", str(out),
                 "--rolling-mean", "3"]) == 0
    report = json.loads(out.read_text())["channels"]
    pair = PairedSeries(y=rolling_mean(y, 3), y_star=rolling_mean(y + 0.5, 3))
    assert math.isclose(report["T_x"]["nrmsre"], nrmsre(pair), rel_tol=1e-12)


def test_validate_missing_channel_exit_1(tmp_path):
    measured, sim, _, _ = _validation_files(tmp_path)
    assert main(["validate", "--measured", str(measured), "--simlog", str(sim),
                 "--channels", "T_missing",
                 "--out", str(tmp_path / "r.json")]) == 1


def test_plot_svg(sim_dir, tmp_path):
    _, _, out = sim_dir
    svg = tmp_path / "tanks.svg"
    assert main(["plot", "--simlog", str(out / "simlog.csv"),
                 "--channels", "HTES_T_1,HTES_T_9",
                 "--out", str(svg), "--title", "idle run"]) == 0
    head = svg.read_text()[:500]
    assert "<svg" in head
    svg2 = tmp_path / "tanks2.svg"
    assert main(["plot", "--simlog", str(out / "simlog.csv"),
                 "--channels", "HTES_T_1,HTES_T_9",
                 "--out", str(svg2), "--title", "idle run"]) == 0
    assert svg.read_bytes() == svg2.read_bytes()


def test_log_level_env(tmp_path):
    scenario = _idle_scenario_file(tmp_path)
    cmd = [sys.executable, "-c",
           "import sys; from polyplant.cli import main; sys.exit(main(sys.argv[1:]))",
           "simulate", "--plant", PLANT, "--scenario", scenario,
           "--out", str(tmp_path / "o")]
    env = dict(os.environ, GREYBOX_LOG_LEVEL="error")
    quiet = subprocess.run(cmd, capture_output=True, env=env)
    assert quiet.returncode == 0
    assert quiet.stdout == b""
    assert b"simulated" not in quiet.stderr
    env["GREYBOX_LOG_LEVEL"] = "info"
    chatty = subprocess.run(cmd, capture_output=True, env=env)
    assert chatty.returncode == 0
    assert b"simulated WEP" in chatty.stderr


def test_console_script_installed():
    exe = shutil.which("polyplant")
    assert exe is not None
    r = subprocess.run([exe, "--help"], capture_output=True)
    assert r.returncode == 0
    assert b"simulate" in r.stdout
