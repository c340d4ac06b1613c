import json
import re

import numpy as np
import pytest

from superradiance.cli import main
from superradiance.io import read_header, read_trace_csv

FAST = {"ensemble": {"nodes": 5}}


def write_config(tmp_path, name="cfg.json", **doc):
    path = tmp_path / name
    path.write_text(json.dumps({**FAST, **doc}, indent=2))
    return str(path)


def run(*argv):
    return main([str(a) for a in argv])


def test_lifetime_sweep_emits_eight_traces_and_summary(tmp_path):
    cfgp = write_config(tmp_path, kind="lifetime", time={"start": -1, "stop": 8, "step": 0.01})
    assert run("lifetime", "--config", cfgp, "--out", tmp_path / "o") == 0
    files = sorted(p.name for p in (tmp_path / "o").iterdir())
    assert len([f for f in files if f.endswith("gated.csv")]) == 8
    summary = (tmp_path / "o" / "lifetime_summary.csv").read_text().splitlines()
    body = [line for line in summary if not line.startswith("#")]
    assert body[0] == "detuning_ueV,tau_half_ns,tau_e_ns,tau_tenth_ns,gated"
    assert len(body) == 9
    trace = (tmp_path / "o" / "lifetime_d0_gated.csv").read_text().splitlines()
    assert trace[0].startswith("# superradiance ")
    assert any(line.startswith("# config: {") for line in trace)
    assert "time_ns,value" in trace


def test_identical_config_gives_identical_bytes(tmp_path):
    cfgp = write_config(tmp_path, kind="hbt", sweep=[0.0, 2.2], time={"stop": 4, "step": 0.01})
    assert run("hbt", "--config", cfgp, "--out", tmp_path / "a") == 0
    assert run("hbt", "--config", cfgp, "--out", tmp_path / "b") == 0
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_parallel_workers_do_not_change_output(tmp_path):
    base = {"kind": "lifetime", "sweep": [0.0, 1.1, 3.3], "time": {"start": -1, "stop": 6, "step": 0.01}}
    one = write_config(tmp_path, "one.json", **base)
    four = write_config(tmp_path, "four.json", workers=4, **base)
    run("lifetime", "--config", one, "--out", tmp_path / "a")
    run("lifetime", "--config", four, "--out", tmp_path / "b")
    for f in (tmp_path / "a").iterdir():
        a = [line for line in f.read_text().splitlines() if not line.startswith("# config")]
        b = [line for line in (tmp_path / "b" / f.name).read_text().splitlines() if not line.startswith("# config")]
        assert a == b


def test_gated_equals_ungated_without_collective_channel(tmp_path):
    cfgp = write_config(tmp_path, kind="lifetime", params={"beta": 0.0, "gamma_d": 3.0}, sweep=[0.0, 2.2], time={"start": -1, "stop": 8, "step": 0.01})
    run("lifetime", "--config", cfgp, "--out", tmp_path / "o")
    for d in ("0", "2.2"):
        _, g, _, _ = read_trace_csv(tmp_path / "o" / f"lifetime_d{d}_gated.csv")
        _, u, _, _ = read_trace_csv(tmp_path / "o" / f"lifetime_d{d}_ungated.csv")
        np.testing.assert_allclose(g, u, atol=1e-10)


def test_delta_and_gate_flags(tmp_path):
    assert run("lifetime", "--out", tmp_path, "--delta", 1.1, "--ungated", "--nodes", 3) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["lifetime_d1.1_ungated.csv", "lifetime_summary.csv"]


def test_json_format(tmp_path):
    assert run("hbt", "--out", tmp_path, "--delta", 2.2, "--nodes", 3, "--format", "json") == 0
    doc = json.loads((tmp_path / "hbt.json").read_text())
    assert doc["version"] and doc["config"]["kind"] == "hbt"
    run_ = doc["runs"][0]
    assert run_["detuning_ueV"] == 2.2 and len(run_["time_ns"]) == len(run_["value"])


def test_hbt_outputs(tmp_path):
    assert run("hbt", "--out", tmp_path, "--nodes", 5) == 0
    t, v, _, header = read_trace_csv(tmp_path / "hbt_d0.csv")
    assert header["kind"] == "g2" and header["mean_detuning_ueV"] == "0"
    np.testing.assert_array_equal(v, v[::-1])
    assert t[0] < 0 < t[-1]
    lines = [line for line in (tmp_path / "hbt_summary.csv").read_text().splitlines() if not line.startswith("#")]
    assert lines[0] == "detuning_ueV,g2_zero,beat_period_ns"
    g0 = {float(r.split(",")[0]): float(r.split(",")[1]) for r in lines[1:]}
    assert g0[0.0] > 0.5 and g0[0.0] < 1.0
    assert g0[15.0] < g0[0.0]


def test_fit_round_trip(tmp_path):
    cfgp = write_config(tmp_path, kind="hbt", sweep=[0.0, 1.1, 2.2], time={"stop": 4, "step": 0.01})
    run("hbt", "--config", cfgp, "--out", tmp_path / "d")
    files = [tmp_path / "d" / f"hbt_d{d}.csv" for d in ("0", "1.1", "2.2")]
    fitp = write_config(tmp_path, "fit.json", kind="fit", datasets=[str(f) for f in files])
    assert run("fit", "--config", fitp, "--out", tmp_path / "f") == 0
    doc = json.loads((tmp_path / "f" / "fit_result.json").read_text())
    assert doc["result"]["gamma_d"] == pytest.approx(8.0, rel=0.01)
    assert doc["result"]["sigma"] == pytest.approx(1.3, rel=0.01)
    assert [i["delta_ueV"] for i in doc["inputs"]] == [0.0, 1.1, 2.2]
    assert all(re.fullmatch("[0-9a-f]{64}", i["sha256"]) for i in doc["inputs"])
    assert doc["config"]["kind"] == "fit"


def test_fit_missing_file_exit_2(tmp_path, capsys):
    assert run("fit", tmp_path / "nope.csv", "--out", tmp_path) == 2
    assert "nope.csv" in capsys.readouterr().err


def test_fit_malformed_row_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("# mean_detuning_ueV: 0\ntime_ns,value\n0,1.0\n0.1,abc\n")
    assert run("fit", bad, "--out", tmp_path) == 1
    assert "bad.csv:4:" in capsys.readouterr().err


def test_validation_error_exit_1(tmp_path, capsys):
    cfgp = write_config(tmp_path, kind="lifetime", params={"gamma_p": 0.2})
    assert run("lifetime", "--config", cfgp, "--out", tmp_path) == 1
    assert "cfg.json:" in capsys.readouterr().err


def test_missing_config_exit_2(tmp_path):
    assert run("lifetime", "--config", tmp_path / "missing.json") == 2


def test_usage_error_exit_1():
    with pytest.raises(SystemExit) as err:
        main(["lifetime", "--format", "xml"])
    assert err.value.code == 1


def test_oracle_check(tmp_path, capsys):
    cfgp = write_config(tmp_path, kind="oracle-check", oracle={"random_sets": 1})
    assert run("oracle-check", "--config", cfgp, "--out", tmp_path) == 0
    out = capsys.readouterr().out
    assert "dicke_pair_intensity" in out and "FAIL" not in out
    assert (tmp_path / "oracle_check.csv").exists()


def test_sweep(tmp_path):
    cfgp = write_config(tmp_path, kind="sweep", sweep=[0.0, 1.0, 2.0], time={"start": -1, "stop": 6, "step": 0.01}, hbt_time={"stop": 3})
    assert run("sweep", "--config", cfgp, "--out", tmp_path) == 0
    rows = [r for r in (tmp_path / "sweep_lifetime_summary.csv").read_text().splitlines() if not r.startswith("#")]
    assert len(rows) == 1 + 6
    assert read_header(tmp_path / "sweep_hbt_summary.csv")["kind"] == "hbt-summary"


def test_plot_styles(tmp_path):
    run("lifetime", "--out", tmp_path / "l", "--delta", 0, "--nodes", 3)
    run("hbt", "--out", tmp_path / "h", "--delta", 0, "--nodes", 3)
    assert run("plot", tmp_path / "l" / "lifetime_d0_gated.csv", tmp_path / "l" / "lifetime_d0_ungated.csv", "--out", tmp_path) == 0
    svg = (tmp_path / "intensity.svg").read_text()
    assert "10^{-1}" in svg and "superradiance" in svg
    assert run("plot", tmp_path / "h" / "hbt_d0.csv", "--out", tmp_path) == 0
    first = (tmp_path / "g2.svg").read_bytes()
    run("plot", tmp_path / "h" / "hbt_d0.csv", "--out", tmp_path)
    assert (tmp_path / "g2.svg").read_bytes() == first


def test_plot_empty_list_is_error(tmp_path):
    assert run("plot", "--out", tmp_path) == 1


def test_plot_figure_contents():
    from superradiance.observables import TimeSeries
    from superradiance.plotting import build_figure

    t = np.linspace(0, 5, 51)
    fig = build_figure([TimeSeries(t, 1 - 0.3 * np.exp(-t), "g2")], style="g2")
    ax = fig.axes[0]
    levels = sorted({line.get_ydata()[0] for line in ax.get_lines()[1:]})
    assert levels == [0.5, 1.0] and ax.get_yscale() == "linear"
    fig = build_figure([TimeSeries(t, np.exp(-t))], style="intensity")
    assert fig.axes[0].get_yscale() == "log"
    with pytest.raises(ValueError):
        build_figure([])


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as err:
        main(["--version"])
    assert err.value.code == 0
    assert capsys.readouterr().out.startswith("superradiance ")
