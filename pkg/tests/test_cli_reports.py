import csv
import hashlib
import json
import math
import subprocess
import sys

import numpy as np

from implosion.cli_reports import DEFAULTS, ENV_OUTPUT_DIR, config_hash, csv_text, dumps, load_config, run


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_profile_command(tmp_path):
    out = tmp_path / "p"
    assert run(["profile", "--gamma", "1.4", "--r", "1.18", "--out", str(out)]) == 0
    rows = read_csv(out / "profile.csv")
    assert rows[0] == ["R", "U_bar", "S_bar", "dU_dR", "dS_dR"]
    assert len(rows) == DEFAULTS["n_grid"] + 1
    vals = np.array(rows[1:], dtype=float)
    assert np.all(np.diff(vals[:, 0]) > 0)
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "profile"
    assert man["results"]["profile"]["residual"] <= 1e-7
    digest = hashlib.sha256((out / "profile.csv").read_bytes()).hexdigest()
    assert man["outputs"]["profile.csv"] == digest
    assert man["input_hash"] == config_hash({**man["config"], "output_dir": "ignored"})


def test_outputs_are_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert run(["certify", "--gamma", "3", "--r", "1.3", "--out", str(tmp_path / name)]) == 0
    for f in ("certify.json", "barriers.csv", "manifest.json"):
        a = (tmp_path / "a" / f).read_bytes()
        b = (tmp_path / "b" / f).read_bytes()
        if f == "manifest.json":
            a = a.replace(str(tmp_path / "a").encode(), b"")
            b = b.replace(str(tmp_path / "b").encode(), b"")
        assert a == b, f


def test_certify_command(tmp_path):
    assert run(["certify", "--gamma", "1.4", "--r", "1.18", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "certify.json").read_text())
    assert rep["certified"] is True
    assert rep["eta_radial"] > 0 and rep["eta_angular"] > 0 and rep["eta_integrated"] > 0
    rows = read_csv(tmp_path / "barriers.csv")
    assert len(rows) == 6


def test_spectrum_command(tmp_path):
    argv = ["spectrum", "--gamma", "1.4", "--r", "1.18", "--n1-max", "2", "--grid-n", "256", "--out", str(tmp_path)]
    assert run(argv) == 0
    census = read_csv(tmp_path / "census.csv")
    assert census[0][:2] == ["n1", "unstable_count"]
    assert [r[0] for r in census[1:]] == ["0", "1", "2"]
    spec = read_csv(tmp_path / "spectrum.csv")
    assert spec[0] == ["n1", "index", "re", "im"]


def test_evolve_command(tmp_path):
    argv = ["evolve", "--gamma", "1.4", "--r", "1.18", "--evolve-grid-n", "256", "--s0", "20", "--s-end", "20.2",
            "--n-out", "3", "--out", str(tmp_path)]
    assert run(argv) == 0
    diag = read_csv(tmp_path / "diagnostics.csv")
    assert diag[0] == ["s", "supU_dev", "supS_dev", "minS", "E_K"]
    assert len(diag) == 4
    state = read_csv(tmp_path / "state.csv")
    assert state[0] == ["R", "U", "S"] and len(state) == 258


def test_scan_command(tmp_path):
    argv = ["scan", "--n-gamma", "10", "--n-r", "5", "--workers", "1", "--out", str(tmp_path)]
    assert run(argv) == 0
    rows = read_csv(tmp_path / "scan.csv")
    assert len(rows) == 51
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["results"]["summary"]["violations"] == 0


def test_portrait_command(tmp_path):
    assert run(["portrait", "--gamma", "1.2", "--r", "1.111", "--portrait-n", "150", "--out", str(tmp_path)]) == 0
    svg = (tmp_path / "portrait.svg").read_text()
    for gid in ("NW0", "NZ0", "DZ0", "Xi1", "Xi2", "b", "trajectory", "quadrilateral-Q", "line-U-Psbar", "points"):
        assert f'<g id="{gid}"' in svg
    pts = {r[0]: (float(r[1]), float(r[2])) for r in read_csv(tmp_path / "points.csv")[1:]}
    assert set(pts) == {"P_s", "P_s_bar", "P_star", "P_0"}
    # at this (gamma, r) P_star lies to the left of P_s_bar
    assert pts["P_star"][0] < pts["P_s_bar"][0]


def test_portrait_beyond_window(tmp_path):
    # no sonic points exist at r = 1.34 for gamma = 5/3
    assert run(["portrait", "--gamma", "1.6666666666666667", "--r", "1.34", "--out", str(tmp_path / "x")]) == 2
    assert not (tmp_path / "x").exists()
    argv = ["portrait", "--gamma", "1.6666666666666667", "--r", "1.34", "--allow-inadmissible",
            "--portrait-n", "120", "--out", str(tmp_path / "y")]
    assert run(argv) == 0
    man = json.loads((tmp_path / "y" / "manifest.json").read_text())
    assert any("sonic points do not exist" in n for n in man["results"]["notes"])
    assert man["results"]["segments"]["NW0"] > 0


def test_validation_exit_codes(tmp_path):
    assert run(["profile", "--gamma", "1.4", "--r", "1.5", "--out", str(tmp_path / "a")]) == 2
    assert run(["profile", "--tol", "-1", "--out", str(tmp_path / "b")]) == 2
    assert run(["evolve", "--s0", "5", "--s-end", "4", "--out", str(tmp_path / "c")]) == 2
    cfgf = tmp_path / "cfg.json"
    cfgf.write_text(json.dumps({"bogus": 1}))
    assert run(["profile", "--config", str(cfgf), "--out", str(tmp_path / "d")]) == 2
    cfgf.write_text("{not json")
    assert run(["profile", "--config", str(cfgf), "--out", str(tmp_path / "e")]) == 2


def test_io_error_exit_code(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run(["scan", "--n-gamma", "2", "--n-r", "2", "--workers", "1", "--out", str(blocker / "sub")]) == 4


def test_config_precedence(tmp_path, monkeypatch):
    cfgf = tmp_path / "cfg.json"
    cfgf.write_text(json.dumps({"gamma": 3.0, "r": 1.3, "tol": 1e-9}))
    monkeypatch.setenv(ENV_OUTPUT_DIR, str(tmp_path / "env"))
    cfg = load_config(["profile", "--config", str(cfgf), "--r", "1.2"])
    assert cfg["gamma"] == 3.0 and cfg["r"] == 1.2 and cfg["tol"] == 1e-9
    assert cfg["output_dir"] == str(tmp_path / "env")
    cfg = load_config(["profile", "--out", str(tmp_path / "flag")])
    assert cfg["output_dir"] == str(tmp_path / "flag")


def test_json_and_csv_formatting():
    text = dumps({"b": float("nan"), "a": np.float64(1.5), "c": [np.int64(2), float("inf")], "d": np.bool_(True)})
    obj = json.loads(text)
    assert list(obj) == ["a", "b", "c", "d"]
    assert obj["b"] == "nan" and obj["c"] == [2, "inf"] and obj["d"] is True
    row = csv_text(["x", "y"], [(0.1, math.pi)]).splitlines()[1]
    assert [float(v) for v in row.split(",")] == [0.1, math.pi]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "implosion", "scan", "--n-gamma", "2", "--n-r", "2", "--workers", "1",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "scan.csv").exists()
    proc = subprocess.run([sys.executable, "-m", "implosion", "profile", "--r", "2.0", "--out", str(tmp_path / "z")],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "OutOfRange" in proc.stderr
