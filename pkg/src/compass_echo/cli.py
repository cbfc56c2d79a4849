"""Command-line driver: ``compass-echo {echo,sweep,fit,validate}``.

Runs are described by a TOML file::

    # units: energies in J_o, times in 1/J_o
    [model]
    J_o = 1.0
    J_e = 4.0
    theta_over_pi = 0.5      # or theta = <radians>
    h = 0.0
    N = 400
    boundary = "periodic"

    [coupling]
    g = 0.1

    [initial]                # Bell state by default
    c_x = 1.0
    c_y = -1.0
    c_z = 1.0

    [time]
    t_min = 0.0
    t_max = 40.0
    dt = 0.02

    [[sweep.axis]]           # sweep only; at most two axes
    name = "theta_over_pi"
    start = 0.3
    stop = 0.7
    num = 21                 # or: values = [ ... ]

    [output]
    dir = "out"

Unknown keys are errors.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import itertools
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__
from .analysis import (LARGE_GAP_WINDOW, NoMinimumFound, SMALL_GAP_WINDOW,
                       fit_gaussian_decay, fit_power_law, find_relaxation_time)
from .fermion_engine import CouplingSpec, _resolve_threads, decoherence_factor
from .measures import InitialXState, records_from_echo
from .model import Boundary, CompassParams

FLOAT_FMT = "%.12g"

SWEEPABLE = ("J_o", "J_e", "delta", "theta", "theta_over_pi", "h", "N", "g")

_SCHEMA = {
    "model": {"J_o", "J_e", "theta", "theta_over_pi", "h", "N", "boundary"},
    "coupling": {"g"},
    "initial": {"c_x", "c_y", "c_z"},
    "time": {"t_min", "t_max", "dt"},
    "sweep": {"axis"},
    "output": {"dir"},
    "engine": {"method", "threads"},
}
_AXIS_KEYS = {"name", "values", "start", "stop", "num"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple


@dataclass
class RunConfig:
    params: CompassParams
    g: float = 0.0
    initial: InitialXState = field(default_factory=lambda: InitialXState(1.0, -1.0, 1.0))
    t_min: float = 0.0
    t_max: float = 40.0
    dt: float = 0.02
    axes: tuple = ()
    out_dir: str = "out"
    method: str = "auto"
    threads: int | None = None
    raw: dict = field(default_factory=dict)

    def times(self) -> np.ndarray:
        n = int(round((self.t_max - self.t_min) / self.dt))
        return self.t_min + self.dt * np.arange(n + 1)


def _number(section, key, value, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"[{section}] {key}: expected a number, got {value!r}")
    if kind is int:
        if float(value) != int(value):
            raise ConfigError(f"[{section}] {key}: expected an integer, got {value!r}")
        return int(value)
    if not math.isfinite(value):
        raise ConfigError(f"[{section}] {key}: must be finite")
    return float(value)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return config_from_dict(raw, source)


def config_from_dict(raw: dict, source: str = "<config>") -> RunConfig:
    for sec, body in raw.items():
        if sec not in _SCHEMA:
            raise ConfigError(f"{source}: unknown section [{sec}]")
        if not isinstance(body, dict):
            raise ConfigError(f"{source}: [{sec}] must be a table")
        for key in body:
            if key not in _SCHEMA[sec]:
                raise ConfigError(f"{source}: unknown key [{sec}] {key}")

    m = raw.get("model", {})
    if "theta" in m and "theta_over_pi" in m:
        raise ConfigError(f"{source}: [model] give theta or theta_over_pi, not both")
    kw = {}
    for key in ("J_o", "J_e", "h"):
        if key in m:
            kw[key] = _number("model", key, m[key])
    if "theta" in m:
        kw["theta"] = _number("model", "theta", m["theta"])
    elif "theta_over_pi" in m:
        kw["theta"] = math.pi * _number("model", "theta_over_pi", m["theta_over_pi"])
    if "N" in m:
        kw["N"] = _number("model", "N", m["N"], int)
    if "boundary" in m:
        try:
            kw["boundary"] = Boundary(m["boundary"])
        except ValueError:
            raise ConfigError(f"{source}: [model] boundary must be 'open' or 'periodic'") from None
    kw.setdefault("J_o", 1.0)
    kw.setdefault("J_e", 4.0)
    kw.setdefault("theta", math.pi / 2)
    try:
        params = CompassParams(**kw)
    except ValueError as exc:
        raise ConfigError(f"{source}: [model] {exc}") from None

    g = _number("coupling", "g", raw.get("coupling", {}).get("g", 0.1))
    ini = raw.get("initial", {})
    try:
        initial = InitialXState(*(_number("initial", k, ini.get(k, d))
                                  for k, d in (("c_x", 1.0), ("c_y", -1.0), ("c_z", 1.0))))
    except ValueError as exc:
        raise ConfigError(f"{source}: [initial] {exc}") from None

    tm = raw.get("time", {})
    t_min = _number("time", "t_min", tm.get("t_min", 0.0))
    t_max = _number("time", "t_max", tm.get("t_max", 40.0))
    dt = _number("time", "dt", tm.get("dt", 0.02))
    if dt <= 0 or t_max < t_min:
        raise ConfigError(f"{source}: [time] need dt > 0 and t_max >= t_min")

    axes = []
    for i, ax in enumerate(raw.get("sweep", {}).get("axis", [])):
        where = f"{source}: [[sweep.axis]] #{i + 1}"
        if not isinstance(ax, dict):
            raise ConfigError(f"{where}: must be a table")
        extra = set(ax) - _AXIS_KEYS
        if extra:
            raise ConfigError(f"{where}: unknown key {sorted(extra)[0]}")
        name = ax.get("name")
        if name not in SWEEPABLE:
            raise ConfigError(f"{where}: name must be one of {', '.join(SWEEPABLE)}")
        if "values" in ax:
            if {"start", "stop", "num"} & set(ax):
                raise ConfigError(f"{where}: give values or start/stop/num, not both")
            vals = [_number("sweep.axis", "values", v) for v in ax["values"]]
        else:
            try:
                vals = np.linspace(_number("sweep.axis", "start", ax["start"]),
                                   _number("sweep.axis", "stop", ax["stop"]),
                                   _number("sweep.axis", "num", ax["num"], int)).tolist()
            except KeyError as exc:
                raise ConfigError(f"{where}: missing {exc.args[0]}") from None
        if not vals:
            raise ConfigError(f"{where}: empty grid")
        if name == "N":
            vals = [int(v) for v in vals]
        axes.append(SweepAxis(name, tuple(vals)))
    if len(axes) > 2:
        raise ConfigError(f"{source}: at most two sweep axes")
    if len({a.name for a in axes}) != len(axes):
        raise ConfigError(f"{source}: duplicate sweep axis")

    eng = raw.get("engine", {})
    method = eng.get("method", "auto")
    if method not in ("auto", "momentum", "realspace"):
        raise ConfigError(f"{source}: [engine] method must be auto, momentum or realspace")
    threads = _number("engine", "threads", eng["threads"], int) if "threads" in eng else None

    return RunConfig(params=params, g=g, initial=initial, t_min=t_min, t_max=t_max, dt=dt,
                     axes=tuple(axes), out_dir=raw.get("output", {}).get("dir", "out"),
                     method=method, threads=threads, raw=raw)


def load_config(path) -> RunConfig:
    p = Path(path)
    return parse_config(p.read_text(), str(p))


def _apply(params: CompassParams, g: float, name: str, value):
    if name == "g":
        return params, float(value)
    if name == "delta":
        return params.replace(J_e=params.J_o + float(value)), g
    if name == "theta_over_pi":
        return params.replace(theta=math.pi * float(value)), g
    if name == "N":
        return params.replace(N=int(value)), g
    return params.replace(**{name: float(value)}), g


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return FLOAT_FMT % x


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    path.write_bytes(buf.getvalue().encode("ascii"))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Path, command: str, config: dict, files) -> Path:
    manifest = {
        "tool": "compass-echo",
        "version": __version__,
        "command": command,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "config": config,
        "files": {f.name: _sha256(f) for f in files},
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _gnuplot(out: Path, csv_name: str, xcol: str, ycol: str, group: str | None = None) -> Path:
    lines = [
        "# companion plot script; run with: gnuplot -p " + csv_name.replace(".csv", ".gp"),
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{xcol}'",
        f"set ylabel '{ycol}'",
    ]
    if group:
        lines.append(f"# rows are grouped by '{group}'; consecutive groups are joined")
    lines.append(f"plot '{csv_name}' using (column('{xcol}')):(column('{ycol}')) with lines")
    path = out / csv_name.replace(".csv", ".gp")
    path.write_text("\n".join(lines) + "\n")
    return path


def _out_dir(args, cfg) -> Path:
    out = Path(args.out or (cfg.out_dir if cfg else "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _threads(args, cfg):
    if args.threads is not None:
        return _resolve_threads(args.threads)
    if cfg is not None and cfg.threads is not None:
        return _resolve_threads(cfg.threads)
    return _resolve_threads(None)


def cmd_echo(cfg: RunConfig, out: Path, threads: int = 1, gnuplot: bool = False) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    t = cfg.times()
    s = decoherence_factor(cfg.params, CouplingSpec(cfg.g), t, method=cfg.method, threads=threads)
    path = out / "echo.csv"
    _write_csv(path, ("t", "abs_F14"), zip(s.times, s.values))
    files = [path]
    if gnuplot:
        files.append(_gnuplot(out, path.name, "t", "abs_F14"))
    write_manifest(out, "echo", cfg.raw, files)
    return path


SWEEP_COLUMNS = ("t", "abs_F14", "eof", "discord", "concurrence", "negativity")


def sweep_rows(cfg: RunConfig, threads: int = 1):
    """All rows of a sweep, ordered by (outer axis, inner axis, t)."""
    if not cfg.axes:
        raise ConfigError("sweep needs at least one [[sweep.axis]]")
    t = cfg.times()
    points = list(itertools.product(*(ax.values for ax in cfg.axes)))

    def run(point):
        p, g = cfg.params, cfg.g
        for ax, v in zip(cfg.axes, point):
            p, g = _apply(p, g, ax.name, v)
        s = decoherence_factor(p, CouplingSpec(g), t, method=cfg.method, threads=1)
        recs = records_from_echo(s.times, s.values, cfg.initial)
        return [tuple(point) + (r.t, r.absF, r.eof, r.discord, r.concurrence, r.negativity)
                for r in recs]

    if threads > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(run, points))
    else:
        blocks = [run(pt) for pt in points]
    header = tuple(ax.name for ax in cfg.axes) + SWEEP_COLUMNS
    return header, [row for b in blocks for row in b]


def cmd_sweep(cfg: RunConfig, out: Path, threads: int = 1, gnuplot: bool = False) -> Path:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    header, rows = sweep_rows(cfg, threads)
    path = out / "sweep.csv"
    _write_csv(path, header, rows)
    files = [path]
    if gnuplot:
        files.append(_gnuplot(out, path.name, "t", "abs_F14", group=header[0]))
    write_manifest(out, "sweep", cfg.raw, files)
    return path


def _read_csv(path: Path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = rows[0]
    data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    return header, data.reshape(-1, len(header))


def _manifest_params(path: Path) -> CompassParams | None:
    m = path.parent / "manifest.json"
    if not m.exists():
        return None
    try:
        return config_from_dict(json.loads(m.read_text()).get("config", {}), str(m)).params
    except (ConfigError, ValueError):
        return None


def relaxation_points_from_csv(path, J_o: float | None = None, smooth: int = 1):
    """``(delta, T_r, |F|(T_r), eof(T_r))`` per gap from a sweep or points CSV."""
    path = Path(path)
    header, data = _read_csv(path)
    cols = {name: i for i, name in enumerate(header)}
    if {"delta", "T_r", "value"} <= set(cols):
        v = data[:, cols["value"]]
        e = data[:, cols["eof"]] if "eof" in cols else v
        return [(d, T, vv, ee) for d, T, vv, ee in zip(data[:, cols["delta"]], data[:, cols["T_r"]], v, e)]
    if "t" not in cols or "abs_F14" not in cols:
        raise ValueError(f"{path}: need columns delta,T_r,value or a sweep CSV with t, abs_F14")
    axis = next((a for a in ("delta", "J_e") if a in cols), None)
    if axis is None:
        raise ValueError(f"{path}: sweep must vary delta or J_e")
    if axis == "J_e" and J_o is None:
        p = _manifest_params(path)
        J_o = p.J_o if p is not None else 1.0
    keys = data[:, cols[axis]]
    out = []
    for key in dict.fromkeys(keys.tolist()):
        rows = data[keys == key]
        t, v = rows[:, cols["t"]], rows[:, cols["abs_F14"]]
        rp = find_relaxation_time(t, v, smooth=smooth)
        i = int(np.searchsorted(t, rp.T_r))
        e = rows[i, cols["eof"]] if "eof" in cols else v[i]
        delta = key if axis == "delta" else abs(key - J_o)
        out.append((float(delta), rp.T_r, rp.value_at_Tr, float(e)))
    return out


def cmd_fit(path, kind: str, window=None, J_o=None, smooth: int = 1) -> dict:
    pts = relaxation_points_from_csv(path, J_o=J_o, smooth=smooth)
    if window is not None:
        lo, hi = window
        pts = [p for p in pts if lo - 1e-12 <= p[0] <= hi + 1e-12]
    if kind == "power_law":
        fit = fit_power_law([(d, T) for d, T, _, _ in pts])
    elif kind == "gaussian":
        fit = fit_gaussian_decay([(T, e) for _, T, _, e in pts])
    else:
        raise ValueError(f"unknown fit kind {kind!r}")
    res = fit.as_dict()
    if window is not None:
        res["window"] = [float(window[0]), float(window[1])]
    res["window_variable"] = "delta"
    return res


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="compass-echo", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (overrides [output] dir)")
    common.add_argument("--threads", type=int, help="worker threads (default: COMPASS_THREADS or 1)")
    common.add_argument("--gnuplot-script", action="store_true", help="also write a .gp plot script")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in (("echo", "|F_14(t)| for one parameter point"),
                           ("sweep", "echo plus measures over one or two parameter axes")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--config", required=True, help="TOML run config")
    p = sub.add_parser("fit", parents=[common], help="power-law or Gaussian fit of relaxation data")
    p.add_argument("input", nargs="?", help="sweep CSV or points CSV (delta,T_r,value[,eof])")
    p.add_argument("--input", dest="input_opt", help=argparse.SUPPRESS)
    p.add_argument("--config", help="ignored unless input is omitted: run its sweep first")
    p.add_argument("--kind", choices=("power_law", "gaussian"), default="power_law")
    p.add_argument("--window", nargs=2, type=float, metavar=("LO", "HI"), help="gap window")
    p.add_argument("--regime", choices=("small", "large"), help="default gap window")
    p.add_argument("--J-o", dest="J_o", type=float, help="J_o for J_e sweeps without a manifest")
    p.add_argument("--smooth", type=int, default=1, help="moving-average width before the minimum search")
    p = sub.add_parser("validate", parents=[common], help="oracle equivalence and invariant checks")
    p.add_argument("--config", help="unused; accepted for symmetry")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            from .validation import run_validation
            report = run_validation()
            print(report.text())
            if args.out:
                out = _out_dir(args, None)
                path = out / "validation.txt"
                path.write_text(report.text() + "\n")
                write_manifest(out, "validate", {}, [path])
            return 0 if report.ok else 1

        if args.command == "fit":
            src = args.input or args.input_opt
            if src is None:
                if not args.config:
                    raise ConfigError("fit needs an input CSV or a --config to sweep")
                cfg = load_config(args.config)
                src = cmd_sweep(cfg, _out_dir(args, cfg), _threads(args, cfg))
            window = args.window
            if window is None and args.regime:
                window = SMALL_GAP_WINDOW if args.regime == "small" else LARGE_GAP_WINDOW
            res = cmd_fit(src, args.kind, window, J_o=args.J_o, smooth=args.smooth)
            text = json.dumps(res, indent=2, sort_keys=True)
            print(text)
            if args.out:
                out = _out_dir(args, None)
                path = out / "fit.json"
                path.write_text(text + "\n")
                write_manifest(out, "fit", {"input": str(src), "kind": args.kind,
                                            "window": list(window) if window else None}, [path])
            return 0

        cfg = load_config(args.config)
        out = _out_dir(args, cfg)
        fn = cmd_echo if args.command == "echo" else cmd_sweep
        path = fn(cfg, out, _threads(args, cfg), args.gnuplot_script)
        print(path)
        return 0
    except (ConfigError, ValueError, NoMinimumFound, OSError) as exc:
        print(f"compass-echo: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
