import json
import shutil
import subprocess

import numpy as np
import pytest

from nlsist.cli import main
from nlsist.config import RunConfig, resolve_threads
from nlsist.spectral import SampledFn, UniformGrid
from nlsist.verify import Check, VerifyReport, fit_slope, verify_suite

SMALL = ["--nx", "256", "--nz", "256", "--x-min", "-10", "--x-max", "10", "--z-half-width", "10"]


def write_samples(path, fn):
    path.write_text(fn.to_json())
    return str(path)


@pytest.fixture
def zero_x(tmp_path):
    return write_samples(tmp_path / "q0.json", SampledFn.zeros(UniformGrid.symmetric(10.0, 256)))


@pytest.fixture
def gauss_r(tmp_path):
    g = UniformGrid.symmetric(10.0, 257)
    return write_samples(tmp_path / "r.json",
                         SampledFn.from_function(g, lambda z: 0.4 * np.exp(-z * z)))


def read(path):
    return json.loads(open(path).read())


# commands

def test_scatter_zero(tmp_path, zero_x):
    out = tmp_path / "sd.json"
    assert main(["scatter", "--input", zero_x, "--output", str(out)] + SMALL) == 0
    d = read(out)
    assert not np.any(SampledFn.from_dict(d).values)
    assert d["rho"] == 0.0


def test_invert_zero_at_t7(tmp_path):
    r = write_samples(tmp_path / "r0.json", SampledFn.zeros(UniformGrid.symmetric(10.0, 256)))
    out = tmp_path / "q.json"
    assert main(["invert", "--input", r, "--t", "7", "--output", str(out)] + SMALL) == 0
    d = read(out)
    assert d["t"] == 7.0
    assert not np.any(SampledFn.from_dict(d).values)


def test_invert_csv(tmp_path, gauss_r):
    out = tmp_path / "q.csv"
    assert main(["invert", "--input", gauss_r, "--output", str(out)] + SMALL) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x,re(q),im(q)" and len(lines) == 257


def test_evolve_command(tmp_path, gauss_r):
    out = tmp_path / "rt.json"
    assert main(["evolve", "--input", gauss_r, "--t", "2", "--output", str(out)]) == 0
    r0 = SampledFn.from_json(open(gauss_r).read())
    rt = SampledFn.from_dict(read(out))
    z = r0.grid.points
    np.testing.assert_allclose(rt.values, np.exp(-2j * z * z) * r0.values, atol=1e-15)


def test_asym_command(tmp_path, gauss_r):
    out = tmp_path / "qas.json"
    assert main(["asym", "--input", gauss_r, "--t", "50", "--output", str(out)] + SMALL) == 0
    d = read(out)
    assert d["t"] == 50.0 and d["grid"]["n"] == 256
    assert main(["asym", "--input", gauss_r, "--output", str(tmp_path / "x.json")] + SMALL) == 2


def test_oracle_command(tmp_path):
    g = UniformGrid.symmetric(20.0, 512)
    q0 = write_samples(tmp_path / "q0.json",
                       SampledFn.from_function(g, lambda x: 0.3 * np.exp(-x * x)))
    out = tmp_path / "field.json"
    assert main(["oracle", "--input", q0, "--t", "1", "--dt", "0.01", "--output", str(out)]) == 0
    d = read(out)
    assert d["t"] == 1.0 and set(d) == {"grid", "re", "im", "t"}


# input errors

def test_malformed_json_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"grid": {"min": 0, "step": 1,\n "n": }')
    out = tmp_path / "out.json"
    assert main(["scatter", "--input", str(bad), "--output", str(out)]) == 2
    assert "line 2" in capsys.readouterr().err
    assert not out.exists()
    assert [p.name for p in tmp_path.iterdir()] == ["bad.json"]


def test_missing_field_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"grid": {"min": 0, "step": 1, "n": 2}, "re": [0, 0]}))
    out = tmp_path / "out.json"
    assert main(["scatter", "--input", str(bad), "--output", str(out)]) == 2
    assert "'im'" in capsys.readouterr().err
    assert not out.exists()


def test_missing_input_exit_2(tmp_path):
    assert main(["scatter", "--output", str(tmp_path / "o.json")]) == 2
    assert main(["scatter", "--input", str(tmp_path / "nope.json")]) == 2


def test_bad_grid_size_exit_2(zero_x):
    assert main(["scatter", "--input", zero_x, "--nz", "8"]) == 2


def test_verify_without_suite_exit_2():
    assert main(["verify"]) == 2


# verification

def test_verify_operators_passes(tmp_path):
    out = tmp_path / "report.json"
    assert main(["verify", "--suite", "operators", "--output", str(out)]) == 0
    d = read(out)
    assert d["suite"] == "operators" and d["pass"] is True
    assert all(set(c) == {"name", "value", "threshold", "pass"} for c in d["checks"])


def test_verify_delta_passes():
    assert verify_suite("delta").passed


def test_verify_is_deterministic():
    a = verify_suite("operators", RunConfig(suite="operators", nz=1024, seed=3)).to_json()
    b = verify_suite("operators", RunConfig(suite="operators", nz=1024, seed=3)).to_json()
    assert a == b


def test_failed_check_fails_report():
    rep = VerifyReport("x", (Check("a", 1.0, 2.0, True), Check("b", 3.0, 2.0, False)))
    assert not rep.passed
    assert rep.to_dict()["pass"] is False
    assert "FAIL" in rep.summary()
    with pytest.raises(ValueError):
        verify_suite("nonsense")


@pytest.mark.skipif(shutil.which("nls") is None, reason="console script not installed")
def test_console_script(tmp_path, zero_x):
    out = tmp_path / "sd.json"
    proc = subprocess.run(["nls", "scatter", "--input", zero_x, "--output", str(out)] + SMALL,
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.exists()


# configuration

def test_threads_flag_beats_environment():
    assert resolve_threads(3, {"NLS_THREADS": "8"}) == 3
    assert resolve_threads(None, {"NLS_THREADS": "8"}) == 8
    assert resolve_threads(None, {}) is None
    with pytest.raises(ValueError):
        resolve_threads(None, {"NLS_THREADS": "0"})


def test_threads_env_reaches_cli(monkeypatch, tmp_path, zero_x):
    monkeypatch.setenv("NLS_THREADS", "2")
    assert main(["scatter", "--input", zero_x, "--output", str(tmp_path / "o.json")] + SMALL) == 0
    monkeypatch.setenv("NLS_THREADS", "zero")
    assert main(["scatter", "--input", zero_x, "--output", str(tmp_path / "o.json")] + SMALL) == 2


def test_run_config_validation():
    cfg = RunConfig.from_dict({"command": "scatter", "nx": 64})
    assert cfg.nx == 64 and cfg.to_dict()["command"] == "scatter"
    with pytest.raises(ValueError, match="unknown config keys"):
        RunConfig.from_dict({"command": "scatter", "colour": "blue"})
    for bad in ({"nx": 8}, {"nz": 15}, {"tol": 0.0}, {"dt": -1.0}, {"command": "run"},
                {"suite": "all"}, {"x_min": 1.0, "x_max": 0.0}, {"threads": 0}):
        with pytest.raises(ValueError):
            RunConfig(**bad)


def test_run_config_grids():
    cfg = RunConfig()
    assert cfg.xgrid.n == 4096 and cfg.xgrid.min == -40.0
    assert cfg.xgrid.point(4095) == pytest.approx(40.0)
    assert cfg.zgrid == UniformGrid.symmetric(40.0, 4096)


# slope fit

def test_fit_slope_examples():
    assert fit_slope([(1, 1), (10, 0.1), (100, 0.01)]) == -1.0
    assert fit_slope([(1, 1), (4, 0.5), (16, 0.25)]) == -0.5


@pytest.mark.parametrize("rows", [[(1, 1), (2, 0), (3, 1)], [(1, 1), (2, 1)],
                                  [(1, 1), (1, 0.5), (2, 0.1)]])
def test_fit_slope_errors(rows):
    with pytest.raises(ValueError):
        fit_slope(rows)
