import json
import os
import subprocess
import sys

import numpy as np
import pytest

from echochain.cli import main
from echochain.csvio import read_table, write_table


def run_cli(args):
    return main(list(args))


def test_csv_roundtrip(tmp_path):
    path = tmp_path / "t.csv"
    cols = {"a": np.array([1.0, 0.1, 1e-17, -3.25]), "b": np.array([4, 5, 6, 7])}
    meta = {"config": {"L": 4, "kicks": [[1.0, 0.0, 1.0]]}, "sigma": 0.93}
    write_table(path, cols, meta)
    meta2, cols2 = read_table(path)
    assert meta2["sigma"] == 0.93
    assert meta2["config"]["kicks"] == [[1.0, 0.0, 1.0]]
    assert np.array_equal(cols2["a"], cols["a"])  # full-precision round trip
    assert np.array_equal(cols2["b"], cols["b"].astype(float))


def test_fidelity_csv_deterministic_across_threads(tmp_path):
    base = ["fidelity", "--preset", "gue", "-L", "8", "--m", "4", "--t-max", "40",
            "--seed", "7", "--epsilon", "5.0"]
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli(base + ["--out", str(out1), "--threads", "1"]) == 0
    assert run_cli(base + ["--out", str(out2), "--threads", "4"]) == 0
    # identical bytes apart from the echoed out-path/thread-count fields
    a = [l for l in out1.read_text().splitlines() if not l.startswith("# config")]
    b = [l for l in out2.read_text().splitlines() if not l.startswith("# config")]
    assert a == b


def test_fidelity_header_and_schema(tmp_path):
    out = tmp_path / "f.csv"
    assert run_cli(["fidelity", "--preset", "gue", "-L", "8", "--m", "3", "--t-max", "25",
                    "--seed", "3", "--delta", "0.05", "--out", str(out)]) == 0
    meta, cols = read_table(out)
    assert list(cols) == ["t_step", "t_heis", "re_f", "im_f"]
    assert meta["class"] == "non_tri"
    assert meta["config"]["L"] == 8
    assert "sigma_total" in meta and "sigma_fa" in meta and "sigma_intrinsic" in meta
    assert cols["re_f"][0] == pytest.approx(1.0, abs=0.2)
    assert cols["t_heis"][1] == pytest.approx(1.0 / meta["t_heis_steps"])
    # epsilon resolved from delta via the preset's sigma
    assert meta["epsilon"] == pytest.approx(2**8 * 0.05**2 * 0.93)


def test_fidelity_requires_exactly_one_strength(tmp_path):
    args = ["fidelity", "--preset", "gue", "-L", "6", "--m", "2", "--seed", "1",
            "--out", str(tmp_path / "x.csv")]
    assert run_cli(args) == 2
    assert run_cli(args + ["--delta", "0.1", "--epsilon", "5.0"]) == 2


def test_seed_mandatory(tmp_path):
    assert run_cli(["fidelity", "--preset", "gue", "-L", "6", "--m", "2", "--delta", "0.1",
                    "--out", str(tmp_path / "x.csv")]) == 2


def test_config_file_with_flag_override(tmp_path):
    cfg = {"L": 7, "m": 3, "seed": 5, "delta": 0.04, "t_max": 20,
           "kicks": [[1.0, 0.0, 1.0], [1.4, 1.4, 0.0]], "out": str(tmp_path / "c.csv")}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    assert run_cli(["fidelity", "--config", str(cfg_path), "--m", "2"]) == 0
    meta, _ = read_table(cfg["out"])
    assert meta["config"]["m"] == 2  # flag wins
    assert meta["config"]["L"] == 7


def test_unknown_config_key_rejected(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"bogus": 1}))
    assert run_cli(["fidelity", "--config", str(cfg_path), "--delta", "0.1",
                    "--seed", "1", "--out", str(tmp_path / "x.csv")]) == 2


def test_calibrate_output(tmp_path):
    out = tmp_path / "cal.csv"
    assert run_cli(["calibrate", "--preset", "gue", "-L", "8", "--m", "6", "--seed", "2",
                    "--out", str(out)]) == 0
    meta, cols = read_table(out)
    assert list(cols) == ["t", "c"]
    assert cols["c"][0] == 8.0  # C(0) = L exactly
    assert meta["sigma"] > 0
    assert meta["nonconvergent"] is False


def test_calibrate_frozen_dynamics_warns_but_exits_zero(tmp_path, capsys):
    out = tmp_path / "cal.csv"
    code = run_cli(["calibrate", "-L", "6", "-J", "0.0", "--kicks", "[[0,0,0]]",
                    "--m", "8", "--seed", "2", "--t-max", "80", "--out", str(out)])
    assert code == 0
    meta, _ = read_table(out)
    assert meta["nonconvergent"] is True
    assert "WARNING" in capsys.readouterr().out


def test_spectrum_and_formfactor(tmp_path):
    spec_out = tmp_path / "ps.csv"
    assert run_cli(["spectrum", "--preset", "gue", "-L", "8", "--out", str(spec_out),
                    "--dump-basis", str(tmp_path / "basis.csv")]) == 0
    meta, cols = read_table(spec_out)
    assert list(cols) == ["s", "density", "surmise_b1", "surmise_b2"]
    assert meta["n_spacings"] == sum(meta["dims"])
    widths = np.diff(np.concatenate(([0.0], cols["s"]))).mean()
    assert np.sum(cols["density"]) * widths == pytest.approx(1.0, abs=0.05)
    _, basis_cols = read_table(tmp_path / "basis.csv")
    assert set(basis_cols) == {"k", "representative", "orbit_size"}

    ff_out = tmp_path / "ff.csv"
    assert run_cli(["formfactor", "--preset", "gue", "-L", "8", "--out", str(ff_out)]) == 0
    meta, cols = read_table(ff_out)
    assert list(cols) == ["tau", "k", "k_ref"]
    assert meta["window"] == 0.15


def test_spectrum_resource_guard(tmp_path):
    assert run_cli(["spectrum", "--preset", "gue", "-L", "12", "--max-dim", "50",
                    "--out", str(tmp_path / "x.csv")]) == 3


def test_fidelity_cost_guard(tmp_path):
    # L=22 with a huge T trips the cost guard before any allocation
    assert run_cli(["fidelity", "--preset", "gue", "-L", "22", "--m", "500",
                    "--t-max", "10000000", "--delta", "0.01", "--seed", "1",
                    "--out", str(tmp_path / "x.csv")]) == 3


def test_rmt_commands(tmp_path):
    out = tmp_path / "rmt.csv"
    assert run_cli(["rmt", "--beta", "2", "--epsilon", "31.78", "--out", str(out)]) == 0
    meta, cols = read_table(out)
    assert list(cols) == ["t", "f", "stderr"]
    assert meta["t1_branch_variant"] == "continuity"
    assert cols["f"][0] == 1.0
    # revival visible on the grid
    sel = (cols["t"] >= 0.9) & (cols["t"] <= 1.1)
    assert cols["f"][sel].max() > cols["f"][(cols["t"] >= 0.5) & (cols["t"] <= 0.7)].max()

    assert run_cli(["rmt", "--beta", "2", "--epsilon", "0", "--out", str(out)]) == 0
    _, cols = read_table(out)
    assert np.allclose(cols["f"], 1.0)

    # orthogonal-class closed form is out of scope: direct users to mc-rmt
    assert run_cli(["rmt", "--beta", "1", "--epsilon", "10", "--out", str(out)]) == 2
    assert run_cli(["rmt", "--beta", "1", "--epsilon", "10", "--method", "elr",
                    "--out", str(out)]) == 0


def test_mc_rmt_command(tmp_path):
    out = tmp_path / "mc.csv"
    assert run_cli(["mc-rmt", "--beta", "1", "--epsilon", "10", "--dim", "64",
                    "--n-real", "20", "--seed", "4", "--points", "12", "--out", str(out)]) == 0
    meta, cols = read_table(out)
    assert list(cols) == ["t", "f", "stderr"]
    assert np.all(cols["stderr"][1:] > 0)
    assert meta["method"] == "mc"


def test_compare_self_is_perfect(tmp_path):
    out = tmp_path / "rmt.csv"
    run_cli(["rmt", "--beta", "2", "--epsilon", "10.3", "--out", str(out)])
    report = tmp_path / "rep.csv"
    assert run_cli(["compare", str(out), str(out), "--out", str(report)]) == 0
    meta, cols = read_table(report)
    assert meta["frac_within_3sigma"] == 1.0
    assert np.all(cols["residual"] == 0.0)


def test_compare_metadata_mismatch(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_cli(["rmt", "--beta", "2", "--epsilon", "10.3", "--out", str(a)])
    run_cli(["rmt", "--beta", "2", "--epsilon", "20.6", "--out", str(b)])
    assert run_cli(["compare", str(a), str(b)]) == 2


def test_compare_flags_elr_systematic(tmp_path, capsys):
    exact, elr = tmp_path / "exact.csv", tmp_path / "elr.csv"
    run_cli(["rmt", "--beta", "2", "--epsilon", "20.6", "--out", str(exact)])
    run_cli(["rmt", "--beta", "2", "--epsilon", "20.6", "--method", "elr", "--out", str(elr)])
    capsys.readouterr()
    assert run_cli(["compare", str(exact), str(elr)]) == 0
    text = capsys.readouterr().out
    assert "systematic deviation" in text
    assert "above" in text  # exact above ELR at late times


def test_console_script_entrypoint():
    proc = subprocess.run(
        [sys.executable, "-m", "echochain.cli", "--version"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "echochain" in proc.stdout


def test_env_threads(tmp_path, monkeypatch):
    monkeypatch.setenv("ECHOCHAIN_THREADS", "3")
    out = tmp_path / "f.csv"
    assert run_cli(["fidelity", "--preset", "gue", "-L", "6", "--m", "2", "--t-max", "10",
                    "--seed", "1", "--delta", "0.02", "--out", str(out)]) == 0
    meta, _ = read_table(out)
    assert meta["config"]["threads"] == 3
