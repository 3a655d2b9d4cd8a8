import json
import subprocess
import sys

import pytest

from hermproj.cli import KERNEL_COLUMNS, main
from hermproj.records import SCHEMA, SWEEP_COLUMNS, read_csv


def run(tmp_path, *args):
    out = tmp_path / "out"
    code = main([*args, "--out", str(out)])
    return code, out


def read_json(path):
    text = path.read_text(encoding="utf-8")
    return json.loads(text)


def test_phase_check_default(tmp_path, capsys):
    code, out = run(tmp_path, "phase-check")
    assert code == 0
    report = read_json(out / "phase_check.json")
    assert report["passed"] is True
    for name in ("D_angle_form", "tau_product", "tau_plus_gap", "one_minus_cos_Sc", "d2P_zero_at_Sc", "grad_Sc"):
        assert report["identities"][name]["passed"]
        assert report["identities"][name]["max_error"] <= report["identities"][name]["tolerance"]
    assert report["schema"] == SCHEMA
    assert report["seed"] == 0
    assert "git_revision" in report and report["config"]["samples"] == 1000
    assert "pass" in capsys.readouterr().out


def test_phase_check_zero_samples(tmp_path, capsys):
    code, out = run(tmp_path, "phase-check", "--samples", "0")
    assert code == 2
    assert "samples" in capsys.readouterr().err
    assert not out.exists()


def test_phase_check_seed_deterministic(tmp_path):
    args = ["phase-check", "--seed", "7", "--samples", "200", "--out", str(tmp_path)]
    path = tmp_path / "phase_check.json"
    assert main(args) == 0
    first = path.read_bytes()
    assert main(args) == 0
    assert path.read_bytes() == first
    assert read_json(path)["seed"] == 7


def test_kernel_file(tmp_path):
    code, out = run(tmp_path, "kernel", "--d", "1", "--lambda", "5", "--points", "101")
    assert code == 0
    meta, header, rows = read_csv(out / "kernel.csv")
    assert tuple(header) == KERNEL_COLUMNS
    assert len(rows) == 101
    assert meta["status"] == "complete"
    assert meta["config"]["lambda"] == 5
    k = [abs(float(r[3])) for r in rows]
    diff = [float(r[6]) for r in rows]
    assert max(diff) < 1e-4 * max(k)
    raw = (out / "kernel.csv").read_bytes()
    assert b"\r\n" not in raw
    raw.decode("utf-8")


def test_kernel_parity_error(tmp_path, capsys):
    code, _ = run(tmp_path, "kernel", "--d", "1", "--lambda", "6")
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_resource_error(tmp_path):
    code, _ = run(tmp_path, "norm", "--d", "3", "--lambda", "41", "--mu", "0.25", "--budget", "100")
    assert code == 3


def test_config_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"d": 2, "lambda": 10, "seed": 4}))
    code, out = run(tmp_path, "basis", "--config", str(cfg), "--lambda", "12")
    assert code == 0
    report = read_json(out / "basis.json")
    # the flag wins over the file, the file over the default
    assert report["lambda"] == 12 and report["k"] == 5 and report["dimension"] == 6
    assert report["config"]["d"] == 2
    assert report["seed"] == 4


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"lamda": 3}))
    assert run(tmp_path, "basis", "--config", str(bad))[0] == 2
    assert "lamda" in capsys.readouterr().err
    assert run(tmp_path, "basis", "--config", str(tmp_path / "missing.json"))[0] == 2
    assert main(["nonsense"]) == 2
    assert run(tmp_path, "norm", "--p", "3")[0] == 2


def test_verdict_band_from_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"verdict": {"sup_band": 1e-9}}))
    code, out = run(tmp_path, "sweep", "sup", "--ks", "100,200,400", "--config", str(cfg))
    assert code == 1
    summary = read_json(out / "sweep_sup.json")["summary"]
    assert summary["band"] == 1e-9 and summary["verdict"] == "fail"


def test_sweep_sup(tmp_path, capsys):
    code, out = run(tmp_path, "sweep", "sup")
    assert code == 0
    meta, header, rows = read_csv(out / "sweep_sup.csv")
    assert tuple(header) == SWEEP_COLUMNS
    assert len(rows) == 6
    summary = read_json(out / "sweep_sup.json")["summary"]
    assert summary["target"] == pytest.approx(-1 / 12)
    assert abs(summary["measured"] - summary["target"]) <= 0.01
    line = capsys.readouterr().out.strip().splitlines()[-1]
    assert "target" in line and "measured" in line and "stderr" in line and "verdict pass" in line


def test_sweep_mu_small(tmp_path):
    code, out = run(tmp_path, "sweep", "mu", "--lambda", "42", "--mu-list", "0.25,0.125,0.0625")
    assert code in (0, 1)
    meta, header, rows = read_csv(out / "sweep_mu.csv")
    assert len(rows) == 3
    assert [r[header.index("mu")] for r in rows] == ["0.25", "0.125", "0.0625"]


def test_sweep_asym_strict_regime(tmp_path):
    code, out = run(tmp_path, "sweep", "asym", "--strict-regime")
    assert code == 2
    assert not (out / "sweep_asym.csv").exists()


def test_norm_routes(tmp_path):
    code, out = run(tmp_path, "norm", "--d", "2", "--lambda", "20")
    assert code == 0
    gram = read_json(out / "norm.json")
    assert gram["route"] == "gram"
    assert gram["norm"] == pytest.approx(1.0, abs=1e-6)
    code, out = run(tmp_path, "norm", "--d", "3", "--lambda", "21", "--p", "1.5", "--q", "3",
                    "--mu", "0.25", "--mu-tilde", "0.125", "--restarts", "2")
    assert code == 0
    power = read_json(out / "norm.json")
    assert power["route"] == "power" and power["norm"] > 0
    assert power["estimate"]["restarts"] == 2


def test_writes_only_to_out(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["basis", "--out", "sub"]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["sub"]
    assert sorted(p.name for p in (tmp_path / "sub").iterdir()) == ["basis.json"]


def test_console_entry(tmp_path):
    res = subprocess.run([sys.executable, "-m", "hermproj.cli", "basis", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "dim=4" in res.stdout
