import csv
import hashlib
import json

import numpy as np
import pytest

import compass_echo.fermion_engine as fe
from compass_echo import cli, oracle
from compass_echo.model import Boundary, CompassParams
from compass_echo.validation import run_validation

BASE = """
# units: energies in J_o, times in 1/J_o
[model]
J_o = 1.0
J_e = 4.0
theta_over_pi = 0.5
h = 0.0
N = {N}
boundary = "{boundary}"

[coupling]
g = {g}

[time]
t_min = 0.0
t_max = {t_max}
dt = {dt}
"""


def write_cfg(tmp_path, extra="", name="run.toml", N=40, boundary="periodic", g=0.1, t_max=2.0, dt=0.1):
    p = tmp_path / name
    p.write_text(BASE.format(N=N, boundary=boundary, g=g, t_max=t_max, dt=dt) + extra)
    return p


def read_rows(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_echo_zero_coupling(tmp_path):
    cfg = write_cfg(tmp_path, g=0.0)
    assert cli.main(["echo", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    header, rows = read_rows(tmp_path / "o" / "echo.csv")
    assert header == ["t", "abs_F14"]
    assert len(rows) == 21
    assert all(r[1] == "1" for r in rows)


def test_echo_matches_golden_for_small_open_chain(tmp_path):
    cfg = write_cfg(tmp_path, N=8, boundary="open", t_max=2.0, dt=0.5)
    assert cli.main(["echo", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    _, rows = read_rows(tmp_path / "echo.csv")
    table = {float(t): float(v) for t, v in rows}
    for p, c, t, F in oracle.load_golden(cli.Path(__file__).parent / "data" / "oracle_golden.json"):
        if p == CompassParams(1.0, 4.0, np.pi / 2, 0.0, 8, Boundary.OPEN) and t in table:
            assert table[t] == pytest.approx(abs(F), abs=1e-10)


def test_manifest_checksums_and_gnuplot(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "o"
    assert cli.main(["echo", "--config", str(cfg), "--out", str(out), "--gnuplot-script"]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert set(man["files"]) == {"echo.csv", "echo.gp"}
    for name, digest in man["files"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest
    assert man["config"]["model"]["J_e"] == 4.0 and man["version"]
    assert "set datafile separator ','" in (out / "echo.gp").read_text()


def test_single_point_sweep_reduces_to_echo(tmp_path):
    axis = '\n[[sweep.axis]]\nname = "theta_over_pi"\nvalues = [0.5]\n'
    cfg = write_cfg(tmp_path, extra=axis)
    cli.main(["echo", "--config", str(cfg), "--out", str(tmp_path / "e")])
    cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "s")])
    _, echo = read_rows(tmp_path / "e" / "echo.csv")
    header, sweep = read_rows(tmp_path / "s" / "sweep.csv")
    assert header == ["theta_over_pi", "t", "abs_F14", "eof", "discord", "concurrence", "negativity"]
    assert [r[1:3] for r in sweep] == echo
    # Bell state: concurrence equals |F14| and negativity is half of it
    for r in sweep:
        assert float(r[5]) == pytest.approx(float(r[2]), abs=1e-11)
        assert float(r[6]) == pytest.approx(float(r[2]) / 2, abs=1e-11)


def test_sweep_order_and_determinism(tmp_path, monkeypatch):
    axes = ('\n[[sweep.axis]]\nname = "delta"\nvalues = [3.0, 1.0]\n'
            '\n[[sweep.axis]]\nname = "theta_over_pi"\nstart = 0.4\nstop = 0.6\nnum = 3\n')
    cfg = write_cfg(tmp_path, extra=axes)
    cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "a"), "--threads", "1"])
    monkeypatch.setenv("COMPASS_THREADS", "3")
    cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "b")])
    a = (tmp_path / "a" / "sweep.csv").read_bytes()
    assert a == (tmp_path / "b" / "sweep.csv").read_bytes()
    _, rows = read_rows(tmp_path / "a" / "sweep.csv")
    keys = [(r[0], r[1]) for r in rows[::21]]
    assert keys == [("3", "0.4"), ("3", "0.5"), ("3", "0.6"), ("1", "0.4"), ("1", "0.5"), ("1", "0.6")]


def test_theta_sweep_is_symmetric(tmp_path):
    axis = '\n[[sweep.axis]]\nname = "theta_over_pi"\nvalues = [0.4, 0.6]\n'
    cfg = write_cfg(tmp_path, extra=axis, N=100, t_max=5.0)
    cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path)])
    _, rows = read_rows(tmp_path / "sweep.csv")
    lo = np.array([float(r[2]) for r in rows if r[0] == "0.4"])
    hi = np.array([float(r[2]) for r in rows if r[0] == "0.6"])
    assert np.abs(lo - hi).max() < 1e-9


@pytest.mark.parametrize("extra,needle", [
    ("\n[output]\ndri = 'x'\n", "unknown key [output] dri"),
    ("\n[outptu]\n", "unknown section [outptu]"),
    ("\n[[sweep.axis]]\nname = 'J_x'\nvalues = [1.0]\n", "name must be one of"),
    ("\n[[sweep.axis]]\nname = 'h'\nvalues = []\n", "empty grid"),
    ("\n[engine]\nmethod = 'fast'\n", "method must be"),
])
def test_config_errors(tmp_path, capsys, extra, needle):
    cfg = write_cfg(tmp_path, extra=extra)
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert needle in capsys.readouterr().err


def test_config_syntax_error_reports_line(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[model]\nJ_o = 1.0\nJ_e = = 4\n")
    assert cli.main(["echo", "--config", str(cfg)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_config_value_errors():
    with pytest.raises(cli.ConfigError, match=r"\[model\]"):
        cli.parse_config("[model]\nN = 7\n")
    with pytest.raises(cli.ConfigError, match="expected a number"):
        cli.parse_config("[coupling]\ng = 'big'\n")
    with pytest.raises(cli.ConfigError, match="not both"):
        cli.parse_config("[model]\ntheta = 1.0\ntheta_over_pi = 0.5\n")


def test_fit_synthetic_points(tmp_path, capsys):
    pts = tmp_path / "points.csv"
    d = [0.5, 1.0, 2.0, 4.0]
    pts.write_text("delta,T_r,value\n" + "".join(f"{x!r},{x ** -0.75!r},0.5\n" for x in d))
    assert cli.main(["fit", str(pts), "--kind", "power_law", "--out", str(tmp_path / "f")]) == 0
    res = json.loads((tmp_path / "f" / "fit.json").read_text())
    assert res["tau_or_delta"] == pytest.approx(-0.75, abs=1e-10)
    assert res["r_squared"] == pytest.approx(1.0)
    assert set(res) >= {"kind", "slope", "intercept", "tau_or_delta", "r_squared", "window", "n_points"}
    capsys.readouterr()
    assert cli.main(["fit", str(pts), "--window", "3", "5"]) == 2
    assert "at least 3 points" in capsys.readouterr().err


def test_fit_from_gap_sweep(tmp_path):
    axis = '\n[[sweep.axis]]\nname = "J_e"\nvalues = [2.0, 2.5, 3.0, 4.0]\n'
    cfg = write_cfg(tmp_path, extra=axis, N=200, t_max=2.0, dt=0.005)
    cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path)])
    res = cli.cmd_fit(tmp_path / "sweep.csv", "power_law")
    assert res["n_points"] == 4 and -1.0 < res["tau_or_delta"] < -0.6
    g = cli.cmd_fit(tmp_path / "sweep.csv", "gaussian")
    assert g["tau_or_delta"] > 0


def test_validate_command(capsys):
    assert cli.main(["validate"]) == 0
    out = capsys.readouterr().out
    assert "all checks passed" in out and "tolerance" in out


def test_validate_catches_corrupted_propagator(monkeypatch, capsys):
    monkeypatch.setattr(fe, "_phases", lambda E, t: np.exp(1j * E * t * 1.05))
    rep = run_validation()
    assert not rep.ok
    bad = [c for c in rep.checks if not c.ok]
    assert any("dense" in c.name for c in bad)
    assert cli.main(["validate"]) == 1


def test_parser_flags():
    args = cli.build_parser().parse_args(["sweep", "--config", "x.toml", "--threads", "4", "--gnuplot-script"])
    assert args.threads == 4 and args.gnuplot_script
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["echo"])
