from __future__ import annotations

import csv
import io
import json

import pytest

from mintloc.cli import main
from mintloc.harness import ScenarioConfig, TRACKERS
from mintloc.waveform import NO_DM, Mpc, make_pulse, save_frame, synthesize


def rows(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


@pytest.fixture
def small_cfg(tmp_path):
    c = ScenarioConfig(n_positions=4, pulses_ns=[0.5, 2.0], center_freq_ghz=[7.0, 7.0], sigma_z2=[0.01, 0.04],
                       dc=[0.3, 0.5], xi=[0.4, 0.3])
    path = tmp_path / "cfg.json"
    path.write_text(c.to_json())
    return path


def test_vas_default(capsys):
    assert main(["vas", "--max-order", "1"]) == 0
    out = rows(capsys.readouterr().out)
    assert {r["order"] for r in out} == {"0", "1"}
    assert [int(r["va_id"]) for r in out] == list(range(len(out)))
    assert all(r["mirror_walls"] == "-" for r in out if r["order"] == "0")


def test_vas_to_file(tmp_path, small_cfg):
    out = tmp_path / "vas.csv"
    assert main(["vas", "--config", str(small_cfg), "--out", str(out)]) == 0
    assert out.read_text().startswith("# mintloc-results-v1\nva_id,bs_id,order,x,y,mirror_walls\n")


def test_crlb(capsys, small_cfg):
    assert main(["crlb", "--config", str(small_cfg), "--pulse", "0.5"]) == 0
    out = rows(capsys.readouterr().out)
    assert len(out) == 4
    assert all(float(r["peb_m"]) > 0 and int(r["n_paths"]) >= 2 for r in out)
    assert main(["crlb", "--config", str(small_cfg), "--obstruction"]) == 0
    blocked = rows(capsys.readouterr().out)
    assert all(float(b["peb_m"]) >= float(a["peb_m"]) for a, b in zip(out, blocked))


def test_range_test_synthetic(capsys, small_cfg):
    assert main(["range-test", "--config", str(small_cfg), "--position", "1", "--bs", "0"]) == 0
    text = capsys.readouterr().out
    head = dict(ln[2:].split("=") for ln in text.splitlines() if ln.startswith("# ") and "=" in ln)
    assert abs(float(head["ml_range_m"]) - float(head["true_range_m"])) < 0.3
    assert len(rows(text)) >= 1


def test_range_test_frame_file(tmp_path, capsys):
    p = make_pulse(0.5e-9)
    fr = synthesize([Mpc(20e-9, 1.0)], NO_DM, 1e-12, p, 80e-9, 1, t0=-20e-9)
    save_frame(tmp_path / "f.txt", fr)
    assert main(["range-test", "--frame", str(tmp_path / "f.txt"), "--prelos", "10"]) == 0
    text = capsys.readouterr().out
    assert "# true_range_m" not in text
    first = rows(text)[0]
    assert float(first["delay_s"]) == pytest.approx(20e-9, abs=p.sample_interval_dtau)


def test_run_writes_outputs(tmp_path, small_cfg):
    out = tmp_path / "res"
    assert main(["run", "--config", str(small_cfg), "--out", str(out), "--pulses", "0.5", "--obstruction", "both",
                 "--seed", "3"]) == 0
    summary = rows((out / "summary.csv").read_text())
    assert len(summary) == 2 * len(TRACKERS)
    assert {r["obstructed"] for r in summary} == {"0", "1"}
    assert (out / "trace.csv").exists() and (out / "ranging_cdf.csv").exists()


@pytest.mark.parametrize("argv", [
    ["run", "--config", "/nonexistent.json", "--out", "x"],
    ["vas", "--plan", "/nonexistent.txt"],
    ["crlb", "--pulse", "3.0"],
    ["range-test", "--position", "100000"],
])
def test_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err.startswith("mintloc: error:")


def test_bad_config_value(tmp_path, capsys):
    (tmp_path / "c.json").write_text(json.dumps({"spacing": 1.0}))
    assert main(["run", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path / "o")]) == 2
    assert "v_max" in capsys.readouterr().err
