import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rank1walk import io
from rank1walk.cli import RunConfig, ConfigError, run_subcommand

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=50, deadline=None)
@given(st.lists(finite, min_size=1, max_size=20))
def test_csv_round_trip_is_lossless(tmp_path_factory, ys):
    path = tmp_path_factory.mktemp("csv") / "f.csv"
    xs = np.arange(len(ys), dtype=float) * 0.1
    io.write_csv(path, ["eta", "value"], [xs, ys])
    header, (x2, y2) = io.read_csv(path, columns=2)
    assert header == ["eta", "value"]
    assert np.array_equal(x2, xs) and np.array_equal(y2, np.asarray(ys))


@pytest.mark.parametrize("body, where", [
    ("eta,value\n0,1\n0.1,abc\n", ":3:"),
    ("eta,value\n0,1\n0.1\n", ":3:"),
    ("eta,value\n0,1\n0.1,nan\n", ":3:"),
    ("eta,value\n0,1\n0.2,1\n0.1,1\n", ":4:"),
    ("eta\n0\n", ":1:"),
    ("", ":1:"),
])
def test_malformed_csv_reports_the_line(tmp_path, body, where):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(io.InputFormatError, match=where):
        io.read_csv(path, columns=2)


def test_cli_exit_code_for_bad_input(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("eta,value\n0,1\n0.1,abc\n")
    code = run_subcommand(["transform", "--input", str(path), "--direction", "fwd",
                           "--out-dir", str(tmp_path)], echo=lambda *_: None)
    assert code == 2
    assert "bad.csv:3" in capsys.readouterr().err


def test_cli_bad_flags_exit_2(capsys):
    assert run_subcommand(["phi"]) == 2
    assert run_subcommand(["phi", "--lambda", "1", "--space", "real:3", "--multiplicities", "2,0"]) == 2
    assert run_subcommand(["phi", "--lambda", "1", "--space", "klein:3"]) == 2
    capsys.readouterr()


def test_config_validation():
    RunConfig("walk").validate()
    with pytest.raises(ConfigError):
        RunConfig("walk", N_list=[8, 4]).validate()
    with pytest.raises(ConfigError):
        RunConfig("walk", d_eta=0).validate()
    with pytest.raises(ConfigError):
        RunConfig("mc", samples=0).validate()


def test_phi_output_and_config_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"space": "complex:4"}))
    code = run_subcommand(["phi", "--lambda", "2", "--eta-grid", "0:1:0.25", "--config", str(cfg),
                           "--out-dir", str(tmp_path)], echo=lambda *_: None)
    assert code == 0
    _, (eta, vals) = io.read_csv(tmp_path / "phi.csv", columns=2)
    assert np.allclose(eta, [0, 0.25, 0.5, 0.75, 1.0]) and vals[0] == pytest.approx(1.0)
    meta = io.read_json(tmp_path / "phi.csv.json")
    assert meta["config"]["space"] == "complex:4"
    assert meta["config"]["command"] == "phi"


def test_outputs_are_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        assert run_subcommand(["heat", "--t", "0.5", "--eta-grid", "0:2:0.1", "--out-dir", str(d)],
                              echo=lambda *_: None) == 0
        outs.append(((d / "heat.csv").read_bytes(), (d / "heat.csv.json").read_bytes().replace(
            str(d).encode(), b"")))
    assert outs[0] == outs[1]


def test_law_round_trip_through_files(tmp_path):
    echo = lambda *_: None  # noqa: E731
    assert run_subcommand(["law", "make-bump", "--out-dir", str(tmp_path)], echo=echo) == 0
    bump = tmp_path / "bump.csv"
    assert run_subcommand(["law", "t", "--law", str(bump), "--out-dir", str(tmp_path)], echo=echo) == 0
    t = io.read_json(tmp_path / "law_t.json")["t"]
    assert t == pytest.approx(0.10784330506105187, rel=1e-12)
    # without the sidecar the tabulated density is interpolated
    (tmp_path / "bump.csv.json").unlink()
    assert run_subcommand(["law", "t", "--law", str(bump), "--out-dir", str(tmp_path)], echo=echo) == 0
    assert io.read_json(tmp_path / "law_t.json")["t"] == pytest.approx(t, rel=1e-3)


def test_mc_writes_summary(tmp_path):
    code = run_subcommand(["mc", "--N", "4", "--samples", "2000", "--seed", "2", "--out-dir", str(tmp_path)],
                          echo=lambda *_: None)
    assert code == 0
    summary = io.read_json(tmp_path / "mc_summary.json")
    assert summary["samples"] == 2000 and 0 < summary["ks"] < 0.1


def test_mc_rejects_spaces_without_a_matrix_model(tmp_path, capsys):
    assert run_subcommand(["mc", "--N", "2", "--space", "quat:8", "--out-dir", str(tmp_path)]) == 1
    capsys.readouterr()


def test_verify_all_subset_via_module(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "rank1walk", "verify-all", "--only", "1,2",
                           "--out-dir", str(tmp_path)], capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0, proc.stderr
    assert "2/2 criteria passed" in proc.stdout
    doc = io.read_json(tmp_path / "verify_all.json")
    assert [r["number"] for r in doc["results"]] == [1, 2]


def test_walk_cli_report(tmp_path):
    code = run_subcommand(["walk", "--N-list", "1,2,4,8", "--out-dir", str(tmp_path)], echo=lambda *_: None)
    assert code == 0
    report = io.read_json(tmp_path / "walk_report.json")["report"]
    assert report["N_list"] == [1, 2, 4, 8] and np.isfinite(report["fitted_rate"])
    header, cols = io.read_csv(tmp_path / "walk_N8.csv", columns=3)
    assert header == ["eta", "f_SN", "Psi"]
