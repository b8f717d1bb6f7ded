import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from ymkahler.cli import main
from ymkahler.io import payload_bytes


def _run(args):
    return CliRunner().invoke(main, args, catch_exceptions=False)


def _write_config(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


def _records(out_dir):
    lines = (Path(out_dir) / "records.jsonl").read_text().strip().splitlines()
    return [json.loads(line) for line in lines]


FAST_SPECTRAL = """
spectral.restarts = 2
spectral.lambda_floor = 3e-5
"""


def test_check_default_config_passes(tmp_path):
    out = tmp_path / "out"
    res = _run(["check", "--out", str(out)])
    assert res.exit_code == 0, res.output
    rec = _records(out)[0]
    assert rec["status"] == "ok"
    assert rec["payload"]["failed"] == 0


def test_check_corrupted_fails(tmp_path):
    cfg = _write_config(tmp_path, "check.corrupt = true\n")
    res = _run(["check", "--config", cfg, "--out", str(tmp_path / "out")])
    assert res.exit_code == 1


def test_missing_config_exits_2(tmp_path):
    res = _run(["check", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path / "o")])
    assert res.exit_code == 2


def test_unknown_config_key_exits_2(tmp_path):
    cfg = _write_config(tmp_path, "grid.m = 8\n")
    res = _run(["spectrum", "--config", cfg, "--out", str(tmp_path / "o")])
    assert res.exit_code == 2


def test_deform_u1_near_reducible_exit_3(tmp_path):
    cfg = _write_config(tmp_path, "group = u1\ngrid.n = 6\n" + FAST_SPECTRAL)
    res = _run(["deform", "--config", cfg, "--out", str(tmp_path / "out")])
    assert res.exit_code == 3
    rec = _records(tmp_path / "out")[0]
    assert rec["status"] == "error"
    assert rec["payload"]["error_kind"] == "NearReducible"


def test_deform_oversized_amplitude_exit_4(tmp_path):
    cfg = _write_config(tmp_path, "grid.n = 6\namplitude = 1.2\ndeform.mode = picard\n"
                        + FAST_SPECTRAL)
    res = _run(["deform", "--config", cfg, "--out", str(tmp_path / "out")])
    assert res.exit_code == 4


def test_deform_success_and_payload(tmp_path):
    cfg = _write_config(tmp_path, "grid.n = 6\namplitude = 0.05\n" + FAST_SPECTRAL)
    res = _run(["deform", "--config", cfg, "--out", str(tmp_path / "out")])
    assert res.exit_code == 0, res.output
    rec = _records(tmp_path / "out")[0]
    assert rec["payload"]["final_residual"] <= 1e-8


def test_spectrum_deterministic_payloads(tmp_path):
    cfg = _write_config(tmp_path, "grid.n = 4\namplitude = 0.3\n" + FAST_SPECTRAL)
    _run(["spectrum", "--config", cfg, "--out", str(tmp_path / "a")])
    _run(["spectrum", "--config", cfg, "--out", str(tmp_path / "b")])
    ra = _records(tmp_path / "a")[0]
    rb = _records(tmp_path / "b")[0]
    assert payload_bytes(ra) == payload_bytes(rb)
    assert ra["timestamp_utc"] != "" and "lambda" in ra["payload"]


def test_spectrum_seed_override(tmp_path):
    cfg = _write_config(tmp_path, "grid.n = 4\namplitude = 0.3\n" + FAST_SPECTRAL)
    _run(["spectrum", "--config", cfg, "--seed", "11", "--out", str(tmp_path / "a")])
    rec = _records(tmp_path / "a")[0]
    assert rec["config"]["seed"] == 11


def test_flow_records_descent(tmp_path):
    cfg = _write_config(tmp_path, "grid.n = 6\namplitude = 0.3\nflow.grad_tol = 1e-5\n")
    res = _run(["flow", "--config", cfg, "--out", str(tmp_path / "out"), "--snapshots"])
    assert res.exit_code == 0, res.output
    rec = _records(tmp_path / "out")[0]
    assert rec["payload"]["final_grad_norm"] <= 1e-5
    assert rec["payload"]["final_energy"] <= rec["payload"]["initial_energy"]
    assert (tmp_path / "out" / "flow_final.ymk").exists()


def test_cutoff_rows_and_csv(tmp_path):
    res = _run(["cutoff", "--out", str(tmp_path / "out")])
    assert res.exit_code == 0, res.output
    rec = _records(tmp_path / "out")[0]
    rows = rec["payload"]["rows"]
    assert [r["ratio"] for r in rows] == [4.0, 16.0, 64.0]
    sums = [r["grad_l4_radial"] + r["hess_l2_radial"] for r in rows]
    assert sums[0] > sums[1] > sums[2]
    csv_text = (tmp_path / "out" / "cutoff.csv").read_text()
    assert csv_text.startswith("ratio,")
    # unresolvable on the default n=8 grid: lattice columns stay empty
    assert all(r["grad_l4_lattice"] is None for r in rows)


def test_continuity_csv(tmp_path):
    cfg = _write_config(tmp_path, (
        "grid.n = 3\ncontinuity.amplitudes = 0.02,0.08\n"
        "continuity.base_amplitude = 0.35\n" + FAST_SPECTRAL))
    res = _run(["continuity", "--config", cfg, "--out", str(tmp_path / "out")])
    assert res.exit_code == 0, res.output
    rows = _records(tmp_path / "out")[0]["payload"]["rows"]
    assert len(rows) == 2
    assert (tmp_path / "out" / "continuity.csv").exists()


def test_gap_small_grid(tmp_path):
    cfg = _write_config(tmp_path, (
        "grid.n = 4\ngap.seeds = 1\ngap.amplitudes = 0.0,0.08\n"
        "gap.grad_tol = 1e-4\n" + FAST_SPECTRAL))
    res = _run(["gap", "--config", cfg, "--out", str(tmp_path / "out")])
    assert res.exit_code == 0, res.output
    rec = _records(tmp_path / "out")[0]
    rows = rec["payload"]["rows"]
    assert len(rows) == 2
    zero_row = [r for r in rows if r["amplitude"] == 0.0][0]
    assert zero_row["status"] == "reducible"
    assert zero_row["energy_before"] == 0.0
    assert (tmp_path / "out" / "gap_summary.csv").exists()
