import json

import numpy as np
import pytest

from fracground import Grid, load_snapshot, save_snapshot
from fracground.cli import EXIT_NOT_CONVERGED, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main
from fracground.config import ConfigError, RunConfig, build_config, dump_config, load_config, parse_config_text

# resolved parameter set on a small grid so every command runs in seconds
SMALL = """
# resolved demo set
problem.C = 4.0
grid.n = 128
grid.L = 12.0
scan.n = 128
scan.eps_list = 0.8, 0.4
path.samples = 41
"""


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(SMALL)
    return p


def run(*argv):
    return main([str(a) for a in argv])


def strip_timing(path):
    d = json.loads(path.read_text())
    d.pop("timing")
    return d


def test_selftest(tmp_path):
    assert run("selftest", "--out", tmp_path) == EXIT_OK
    rep = json.loads((tmp_path / "selftest_report.json").read_text())
    assert all(v["pass"] for v in rep["results"].values())
    assert "statement" in rep["convention"] and rep["convention"]["calibrate_normalization"]["c_ratio"] > 0


def test_solve_verify_path_bubble(tmp_path, cfg_file):
    out = tmp_path / "o"
    assert run("solve", "--config", cfg_file, "--out", out) == EXIT_OK
    for name in ("report.json", "omega.bin", "u_min.bin", "radial_profile.csv"):
        assert (out / name).exists()
    rep = json.loads((out / "report.json").read_text())
    res = rep["results"]["solve_ground_state"]
    assert res["converged"] and res["el_rel_residual"] <= 1e-2
    omega, s = load_snapshot(out / "omega.bin")
    assert s == 0.5 and omega.grid.n == 128
    assert run("verify", "--config", cfg_file, "--snapshot", out / "omega.bin", "--out", out) == EXIT_OK
    assert run("path", "--config", cfg_file, "--snapshot", out / "omega.bin", "--out", out) == EXIT_OK
    assert (out / "path_profile.csv").read_text().startswith("t,I_closed,I_direct,dIdt,H,norm")
    assert run("bubble-scan", "--config", cfg_file, "--out", out) == EXIT_OK
    assert (out / "bubble_scan.json").exists()


def test_solve_deterministic(tmp_path, cfg_file):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("solve", "--config", cfg_file, "--out", a, "--seed", 3) == EXIT_OK
    assert run("solve", "--config", cfg_file, "--out", b, "--seed", 3) == EXIT_OK
    assert strip_timing(a / "report.json") == strip_timing(b / "report.json")
    assert (a / "omega.bin").read_bytes() == (b / "omega.bin").read_bytes()


def test_not_converged_exit(tmp_path, cfg_file):
    cfg = cfg_file.read_text() + "solver.max_iterations = 1\n"
    cfg_file.write_text(cfg)
    assert run("solve", "--config", cfg_file, "--out", tmp_path) == EXIT_NOT_CONVERGED


def test_verify_fails_on_non_solution(tmp_path, cfg_file):
    g = Grid(2, 128, 6.0)
    snap = tmp_path / "g.bin"
    save_snapshot(snap, g.sample(lambda x, y: np.exp(-x * x - y * y)), 0.5)
    assert run("verify", "--config", cfg_file, "--snapshot", snap, "--out", tmp_path) == EXIT_VERIFY


def test_usage_errors(tmp_path, cfg_file, capsys):
    assert run("solve", "--config", tmp_path / "missing.cfg") == EXIT_USAGE
    assert run("nonsense") == EXIT_USAGE
    assert run("verify", "--config", cfg_file, "--out", tmp_path) == EXIT_USAGE  # no snapshot
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"nope" + bytes(40))
    assert run("verify", "--config", cfg_file, "--snapshot", bad, "--out", tmp_path) == EXIT_USAGE
    wrong = tmp_path / "wrong.bin"
    save_snapshot(wrong, Grid(2, 64, 6.0).zeros(), 0.5)
    assert run("verify", "--config", cfg_file, "--snapshot", wrong, "--out", tmp_path) == EXIT_USAGE
    assert "does not match" in capsys.readouterr().err
    badq = tmp_path / "q.cfg"
    badq.write_text("problem.q = 5\n")
    assert run("solve", "--config", badq, "--out", tmp_path) == EXIT_USAGE


@pytest.mark.parametrize("text,match", [
    ("grid.n", "expected 'key = value'"),
    ("grid.n = abc", "cannot parse"),
    ("bogus.x = 1", "unknown section"),
    ("grid.nope = 1", "unknown key"),
    ("grid.n = 64\ngrid.n = 32", "duplicate"),
    ("grid.n = 48", r"\[grid\]"),
    ("solver.initial_guess = magic", "invalid"),
    ("problem.s = 1.5", r"\[problem\]"),
    ("alpha = 1", "top-level"),
])
def test_config_errors_carry_location(text, match):
    with pytest.raises(ConfigError, match=match):
        build_config(parse_config_text(text, "x.cfg"))


def test_config_error_names_line():
    with pytest.raises(ConfigError, match=r"x\.cfg:3"):
        build_config(parse_config_text("# c\ngrid.n = 64\ngrid.L = zz\n", "x.cfg"))


def test_config_round_trip(tmp_path):
    cfg = build_config(parse_config_text(SMALL))
    assert cfg.problem.C == 4.0 and cfg.scan.eps_list == (0.8, 0.4)
    p = tmp_path / "dump.cfg"
    p.write_text(dump_config(cfg))
    assert load_config(p).as_dict() == cfg.as_dict()
    assert load_config(None).as_dict() == RunConfig().as_dict()
