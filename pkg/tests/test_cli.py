import json
import subprocess
import sys
from pathlib import Path

import pytest

from trisymp import cli

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
# a pinned torus budget skips the search
TORUS_PIN = ["--set", "epsilon=0.0031622776601683794", "--set", "delta=1e-7", "--set", "C=1e7"]


def _only(out: Path, pattern: str) -> Path:
    hits = list(out.glob(pattern))
    assert len(hits) == 1, hits
    return hits[0]


def test_harmonic(tmp_path):
    assert cli.main(["harmonic", str(CONFIGS / "genus2.cfg"), "--out", str(tmp_path)]) == cli.EXIT_PASS
    d = _only(tmp_path, "harmonic-*")
    rep = json.loads((d / "harmonic.json").read_text())
    assert rep["harmonic_dimension"] == 4 and rep["index_sum"] == -2 and rep["validation"]["pass"]
    tri = json.loads((d / "triple.json").read_text())
    assert len(tri["zeros"]) == 2


def test_verify_spine_pinned_is_deterministic(tmp_path):
    args = ["verify-spine", str(CONFIGS / "torus.cfg"), "--out", str(tmp_path)] + TORUS_PIN
    assert cli.main(args) == cli.EXIT_PASS
    d = _only(tmp_path, "verify-spine-*")
    first = {p.name: p.read_bytes() for p in d.iterdir()}
    assert set(first) == {"report.json", "samples.csv"}
    assert cli.main(args) == cli.EXIT_PASS
    assert {p.name: p.read_bytes() for p in d.iterdir()} == first
    rep = json.loads(first["report.json"])
    assert rep["status"] == "pass" and rep["search"] is None and rep["lemmas"]["contact_pm"]["pass"]


def test_verify_spine_infeasible(tmp_path):
    args = ["verify-spine", str(CONFIGS / "genus2.cfg"), "--out", str(tmp_path),
            "--set", "epsilon_range=0.05 0.05", "--set", "invC_range=1 1", "--set", "deltaC_range=1 1",
            "--set", "sweep=1 1 1", "--set", "grid_s=3", "--set", "grid_t=3"]
    assert cli.main(args) == cli.EXIT_INFEASIBLE
    rep = json.loads(_only(tmp_path, "verify-spine-*/report.json").read_text())
    assert rep["status"] == "infeasible" and rep["least_violating"]["failing"]


def test_flip_control(tmp_path):
    assert cli.main(["verify-spine", str(CONFIGS / "torus_flip.cfg"), "--out", str(tmp_path)]) == cli.EXIT_FAIL


def test_fs_demo(capsys):
    assert cli.main(["fs-demo"]) == cli.EXIT_PASS
    assert "omega_FS chart independence" in capsys.readouterr().out


def test_foliate(tmp_path):
    assert cli.main(["foliate", str(CONFIGS / "genus2.cfg"), "--out", str(tmp_path)]) == cli.EXIT_PASS
    d = _only(tmp_path, "foliate-*")
    summary = json.loads((d / "foliation.json").read_text())
    assert summary["strips"] > 0 and min(summary["transversal_margins"]) > 0
    paths = json.loads((d / "paths.json").read_text())
    assert set(paths) == {"leaves", "transversals", "zero_paths"}


def test_foliate_pants_with_integral_periods(tmp_path):
    args = ["foliate", "--set", "mesh=octagon:6", "--set", "periods=1 0 0 1", "--out", str(tmp_path)]
    assert cli.main(args) == cli.EXIT_PASS
    summary = json.loads(_only(tmp_path, "foliate-*/foliation.json").read_text())
    assert summary["pants"]["pants"]


@pytest.mark.parametrize("sets", [["mesh=missing.off"], ["bogus=1"], ["periods=1 2 3"], ["mesh=torus:x"]])
def test_input_errors(tmp_path, sets, capsys):
    args = ["harmonic", str(CONFIGS / "torus.cfg"), "--out", str(tmp_path)]
    for s in sets:
        args += ["--set", s]
    assert cli.main(args) == cli.EXIT_INPUT
    assert "input error" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert cli.main(["harmonic", str(tmp_path / "none.cfg")]) == cli.EXIT_INPUT


def test_relative_output_dir_follows_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("mesh = torus:6\noutput_dir = results\n")
    assert cli.main(["harmonic", str(cfg)]) == cli.EXIT_PASS
    assert _only(tmp_path / "results", "harmonic-*").is_dir()


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "trisymp.cli", "fs-demo"], capture_output=True, text=True)
    assert proc.returncode == 0
    proc = subprocess.run([sys.executable, "-m", "trisymp.cli", "nope"], capture_output=True, text=True)
    assert proc.returncode != 0
