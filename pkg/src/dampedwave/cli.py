"""Config-driven experiment runner.

    python -m dampedwave linear-decay --config exp.ini --out results/ --seed 3

A config is an INI file.  Every key belongs to a known section, and unknown
sections or keys are rejected before any computation starts.  Each run writes
CSV and plot-data files plus ``manifest.json``, which holds the config hash,
the version, the wall time and the list of files.  CSV files end with a
comment line pointing at the manifest; apart from the manifest, the outputs
are byte-identical across reruns of the same config.

Exit codes: 0 success, 2 config error, 3 runtime failure.  Errors are
reported as one line ``config-error: ...`` or ``runtime-error: ...`` on stderr.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import math
import subprocess
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    CriticalParams,
    SolverConfig,
    TestFunctionPair,
    check_gn,
    check_hls,
    fit_decay_rate,
    sweep_criticality,
    weak_functional,
    xt_norm,
)
from .besov import BesovSpec, besov_norm, heat_characterization_norm, lp_partition, make_besov_data, write_block_norms
from .evolution import fractional_heat_solve, linear_trajectory, semilinear_solve, wraparound_time
from .grid import RealField, lp_norm, make_grid, random_band_limited
from .multipliers import scan_zone, write_bound_reports
from .plotdata import write_columns
from .riesz import RieszParams

__all__ = ["COMMANDS", "ConfigError", "ExperimentConfig", "load_config", "run_config", "main"]

COMMANDS = (
    "linear-decay",
    "heat-decay",
    "semilinear",
    "sweep",
    "besov-norm",
    "bounds-scan",
    "inequalities",
    "weak-functional",
)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class ConfigError(ValueError):
    pass


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]


def _tuple_list(text: str) -> list[tuple[float, ...]]:
    """'0.5:1.5, 0.25:1.5' -> [(0.5, 1.5), (0.25, 1.5)]"""
    return [tuple(float(x) for x in item.split(":")) for item in text.split(",") if item.strip()]


# section -> key -> (parser, default)
SCHEMA = {
    "experiment": {"command": (str, None)},
    "grid": {"dims": (int, 1), "points_per_dim": (int, 1024), "half_length": (float, 64.0)},
    "physics": {
        "beta": (float, 0.0), "gamma": (float, 0.0), "p1": (float, 3.0), "p2": (float, 3.0),
        "alpha": (float, 1.0), "heat_order": (float, 1.0), "T": (float, 50.0), "dt": (float, 0.05),
        "zero_mode": (str, "zero"),
    },
    "data": {
        "profile": (str, "besov"), "amplitude": (float, 1.0), "seed": (int, 0),
        "samples": (int, 20), "max_freq": (float, 4.0),
    },
    "fit": {"t_lo": (float, 1.0), "t_hi": (float, 40.0), "points": (int, 200)},
    "sweep": {"p1_values": (_float_list, [1.2, 1.5, 3.0]), "p2_values": (_float_list, [1.2, 1.5, 3.0])},
    "besov": {"s": (float, -0.5), "p": (float, 2.0), "q": (float, math.inf)},
    "bounds": {"zones": (str, "low,mid,high"), "t_max": (float, 50.0), "t_points": (int, 201),
               "xi_points": (int, 201), "epsilon": (float, 0.25)},
    "weak": {"R": (float, 6.0), "snapshot_every": (int, 10)},
    "inequalities": {"hls": (_tuple_list, [(0.5, 4 / 3), (0.25, 1.5), (0.5, 1.8)]),
                     "gn": (_tuple_list, [(0.5, 1, 2, 2, 2), (0.5, 1, 4, 2, 2), (0, 1, 4, 2, 2)])},
    "output": {"dir": (str, "results")},
    "tolerances": {"slack_l2": (float, 0.1), "slack_hdot": (float, 0.1), "slack_dt": (float, 0.15),
                   "blowup_factor": (float, 1e6)},
}


@dataclass
class ExperimentConfig:
    command: str
    values: dict = field(default_factory=dict)
    source_text: str = ""

    def __getitem__(self, key: tuple[str, str]):
        section, name = key
        if (section, name) in self.values:
            return self.values[(section, name)]
        return SCHEMA[section][name][1]

    def canonical(self) -> str:
        items = {f"{s}.{k}": repr(v) for (s, k), v in sorted(self.values.items())}
        return json.dumps({"command": self.command, "values": items}, sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def load_config(path: str | None, command: str, overrides: dict | None = None) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep key case (T, R)
    text = ""
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {str(exc).splitlines()[0]}") from None
    values = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            conv = SCHEMA[section][key][0]
            try:
                values[(section, key)] = conv(raw)
            except ValueError:
                raise ConfigError(f"{section}.{key}: cannot parse {raw!r}") from None
    for key, val in (overrides or {}).items():
        values[key] = val
    declared = values.pop(("experiment", "command"), None)
    if declared is not None and declared != command:
        raise ConfigError(f"config declares command {declared!r} but {command!r} was requested")
    cfg = ExperimentConfig(command, values, text)
    validate(cfg)
    return cfg


def _require(cond: bool, message: str):
    if not cond:
        raise ConfigError(message)


def validate(cfg: ExperimentConfig):
    """Check every parameter against the owning module's preconditions."""
    _require(cfg.command in COMMANDS, f"unknown command {cfg.command!r}")
    n, N, L = cfg["grid", "dims"], cfg["grid", "points_per_dim"], cfg["grid", "half_length"]
    try:
        grid = make_grid(n, N, L)
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from None
    beta, gamma = cfg["physics", "beta"], cfg["physics", "gamma"]
    _require(0 <= beta < n / 2, f"physics.beta = {beta} violates 0 <= beta < n/2 = {n / 2}")
    _require(0 <= gamma < n, f"physics.gamma = {gamma} violates 0 <= gamma < n = {n}")
    zero_mode = cfg["physics", "zero_mode"]
    _require(zero_mode in ("zero", "lattice"), f"physics.zero_mode = {zero_mode!r}; use zero or lattice")
    _require(cfg["physics", "p1"] > 0 and cfg["physics", "p2"] > 0, "physics.p1, physics.p2 must be positive")
    _require(0 < cfg["physics", "alpha"] <= 1, "physics.alpha must lie in (0, 1]")
    _require(cfg["physics", "heat_order"] >= 1, "physics.heat_order must be >= 1")
    T, dt = cfg["physics", "T"], cfg["physics", "dt"]
    _require(T > 0 and dt > 0 and dt <= T, "physics: need 0 < dt <= T")
    _require(cfg["data", "profile"] in ("besov", "gaussian"), "data.profile must be 'besov' or 'gaussian'")
    _require(cfg["data", "samples"] >= 1, "data.samples must be >= 1")
    _require(cfg["tolerances", "blowup_factor"] > 1, "tolerances.blowup_factor must exceed 1")
    guard = wraparound_time(grid)
    if cfg.command in ("linear-decay", "semilinear", "sweep"):
        _require(T <= guard + 1e-12, f"physics.T = {T} exceeds the wrap-around guard 0.8*L = {guard}")
    if cfg.command == "linear-decay":
        lo, hi = cfg["fit", "t_lo"], cfg["fit", "t_hi"]
        _require(0 <= lo < hi <= T, f"fit window [{lo}, {hi}] must lie inside [0, T = {T}]")
    if cfg.command == "sweep":
        _require(cfg["sweep", "p1_values"] and cfg["sweep", "p2_values"], "sweep: empty p lists")
        _require(min(cfg["sweep", "p1_values"] + cfg["sweep", "p2_values"]) > 0, "sweep: p values must be positive")
    if cfg.command == "besov-norm":
        try:
            BesovSpec(cfg["besov", "s"], cfg["besov", "p"], cfg["besov", "q"])
        except ValueError as exc:
            raise ConfigError(f"besov: {exc}") from None
    if cfg.command == "bounds-scan":
        zones = [z.strip() for z in cfg["bounds", "zones"].split(",")]
        _require(all(z in ("low", "mid", "high") for z in zones), "bounds.zones must be from low, mid, high")
        _require(0 < cfg["bounds", "epsilon"] < 0.5, "bounds.epsilon must lie in (0, 1/2)")
    if cfg.command == "weak-functional":
        R = cfg["weak", "R"]
        _require(0 < R <= guard, f"weak.R = {R} must lie in (0, 0.8*L = {guard}]")
        _require(R * R <= T + 1e-12, f"weak.R^2 = {R * R} exceeds physics.T = {T}")
        _require(cfg["physics", "p1"] + cfg["physics", "p2"] > 2, "weak: need p1 + p2 > 2")
    if cfg.command == "inequalities":
        for tup in cfg["inequalities", "hls"]:
            _require(len(tup) == 2, "inequalities.hls entries are gamma:m2")
            g, m2 = tup
            inv = 1 / m2 - g / n
            _require(0 < g < n and m2 > 1 and inv > 0 and 1 / inv > m2,
                     f"inequalities.hls {g}:{m2} violates 1 < m2 < m1 < inf")
        for tup in cfg["inequalities", "gn"]:
            _require(len(tup) == 5, "inequalities.gn entries are theta:a:p:p0:p1")


# -- pipelines -----------------------------------------------------------------


class Run:
    """Collects emitted files for the manifest."""

    def __init__(self, cfg: ExperimentConfig, out: Path):
        self.cfg = cfg
        self.out = out
        self.files: list[str] = []
        self.digest = cfg.digest()

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.out / name

    def csv(self, name: str, header, rows):
        with open(self.path(name), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([repr(v) if isinstance(v, float) else v for v in row])
            fh.write(f"# manifest: manifest.json config_sha256={self.digest}\n")

    def stamp(self, name: str):
        """Append the manifest cross-reference to a CSV written by a library routine."""
        with open(self.out / name, "a") as fh:
            fh.write(f"# manifest: manifest.json config_sha256={self.digest}\n")


def _grid(cfg):
    return make_grid(cfg["grid", "dims"], cfg["grid", "points_per_dim"], cfg["grid", "half_length"])


def _data(cfg, grid) -> RealField:
    amp = cfg["data", "amplitude"]
    if cfg["data", "profile"] == "gaussian":
        return RealField(grid, amp * np.exp(-grid.radius**2 / 2))
    return make_besov_data(grid, cfg["physics", "beta"], amp)


def _linear_decay(run: Run):
    cfg = run.cfg
    g = _grid(cfg)
    u0 = _data(cfg, g)
    beta, alpha = cfg["physics", "beta"], cfg["physics", "alpha"]
    times = np.linspace(0.0, cfg["physics", "T"], cfg["fit", "points"])
    traj = linear_trajectory(u0, u0, times, alpha=alpha)
    traj.to_csv(run.path("trajectory.csv"))
    run.stamp("trajectory.csv")
    window = (cfg["fit", "t_lo"], cfg["fit", "t_hi"])
    bounds = {
        "l2": -beta / 2 + cfg["tolerances", "slack_l2"],
        "hdot_alpha": -(beta + alpha) / 2 + cfg["tolerances", "slack_hdot"],
        "dt_l2": -beta / 2 - 1 + cfg["tolerances", "slack_dt"],
    }
    rows = []
    for name, bound in bounds.items():
        slope, err = fit_decay_rate((traj.t, traj.series(name)), window)
        rows.append([name, slope, err, bound, int(slope <= bound), window[0], window[1]])
        write_columns(run.path(f"decay_{name}.dat"), np.log1p(traj.t), np.log(traj.series(name)),
                      header=f"log(1+t) log({name})")
    run.csv("decay_fit.csv", ["quantity", "slope", "stderr", "bound", "within_bound", "t_lo", "t_hi"], rows)


def _heat_decay(run: Run):
    cfg = run.cfg
    g = _grid(cfg)
    u0 = _data(cfg, g)
    order = cfg["physics", "heat_order"]
    fam = lp_partition(g)
    times = np.geomspace(max(cfg["fit", "t_lo"], 1e-3), cfg["fit", "t_hi"], cfg["fit", "points"])
    rows, norms = [], []
    for t in times:
        u = fractional_heat_solve(u0, order, t)
        b = besov_norm(u, BesovSpec(0.0, 2.0, 2.0), fam)
        norms.append(b)
        rows.append([float(t), lp_norm(u, 2), b])
    run.csv("heat_decay.csv", ["t", "l2", "besov_0_2_2"], rows)
    slope, err = fit_decay_rate((times, np.array(norms)), (times[0], times[-1]))
    run.csv("decay_fit.csv", ["quantity", "slope", "stderr", "t_lo", "t_hi"],
            [["besov_0_2_2", slope, err, float(times[0]), float(times[-1])]])
    write_columns(run.path("heat_decay.dat"), np.log1p(times), np.log(norms), header="log(1+t) log(norm)")


def _semilinear(run: Run):
    cfg = run.cfg
    g = _grid(cfg)
    u0 = _data(cfg, g)
    params = RieszParams(cfg["physics", "gamma"], g.dims, cfg["physics", "zero_mode"])
    traj = semilinear_solve(u0, u0, cfg["physics", "p1"], cfg["physics", "p2"], params,
                            cfg["physics", "T"], cfg["physics", "dt"], alpha=cfg["physics", "alpha"],
                            blowup_factor=cfg["tolerances", "blowup_factor"])
    traj.to_csv(run.path("trajectory.csv"))
    run.stamp("trajectory.csv")
    norm = xt_norm(traj, cfg["physics", "beta"])
    run.csv("summary.csv", ["blown_up", "blowup_time", "final_l2", "xt_norm"],
            [[int(traj.blown_up), "" if traj.blowup_time is None else traj.blowup_time,
              traj.l2[-1], float(norm)]])


def _sweep(run: Run, threads: int):
    cfg = run.cfg
    params = CriticalParams(cfg["grid", "dims"], cfg["physics", "beta"], cfg["physics", "gamma"])
    solver = SolverConfig(cfg["grid", "points_per_dim"], cfg["grid", "half_length"], cfg["physics", "T"],
                          cfg["physics", "dt"], cfg["physics", "alpha"], cfg["tolerances", "blowup_factor"],
                          threads, cfg["physics", "zero_mode"])
    pairs = [(a, b) for a in cfg["sweep", "p1_values"] for b in cfg["sweep", "p2_values"]]
    report = sweep_criticality(params, pairs, cfg["data", "amplitude"], solver)
    report.to_csv(run.path("sweep.csv"))
    run.stamp("sweep.csv")
    report.write_heatmap(run.path("sweep_heatmap.dat"))
    failed = [r for r in report.rows if r.outcome == "error"]
    if failed:
        raise RuntimeError(f"{len(failed)} sweep rows failed; first: {failed[0].note}")


def _besov_norm(run: Run, rng):
    cfg = run.cfg
    g = _grid(cfg)
    fam = lp_partition(g)
    spec = BesovSpec(cfg["besov", "s"], cfg["besov", "p"], cfg["besov", "q"])
    fields = [("data", _data(cfg, g))]
    fields += [(f"random_{k}", random_band_limited(g, rng, cfg["data", "max_freq"]))
               for k in range(cfg["data", "samples"])]
    t_grid = np.geomspace(1e-2, 1e3, 61)
    rows = []
    for name, f in fields:
        b = besov_norm(f, spec, fam)
        h = heat_characterization_norm(f, -spec.s, t_grid) if spec.s < 0 else math.nan
        rows.append([name, b, h, b / h if spec.s < 0 else math.nan])
    run.csv("besov.csv", ["field", "besov_norm", "heat_norm", "ratio"], rows)
    write_block_norms(fields[0][1], spec, fam, run.path("block_norms.csv"))
    run.stamp("block_norms.csv")
    run.csv("partition.csv", ["j_min", "j_max", "residue", "max_overlap"],
            [[fam.j_min, fam.j_max, fam.partition_residue(), fam.max_overlap()]])


def _bounds_scan(run: Run):
    cfg = run.cfg
    eps = cfg["bounds", "epsilon"]
    t_grid = np.linspace(0.0, cfg["bounds", "t_max"], cfg["bounds", "t_points"])
    ranges = {"low": (0.0, eps * (1 - 1e-9)), "mid": (eps, 0.5), "high": (0.5 + 1e-6, 3.0)}
    reports = []
    for zone in (z.strip() for z in cfg["bounds", "zones"].split(",")):
        xi = np.linspace(*ranges[zone], cfg["bounds", "xi_points"])
        reports += scan_zone(zone, t_grid, xi, epsilon=eps)
    write_bound_reports(reports, run.path("bound_scan.csv"))
    run.stamp("bound_scan.csv")


def _inequalities(run: Run, rng):
    cfg = run.cfg
    g = _grid(cfg)
    samples = [random_band_limited(g, rng, cfg["data", "max_freq"]) for _ in range(cfg["data", "samples"])]
    summary = []
    for k, (gamma, m2) in enumerate(cfg["inequalities", "hls"]):
        rep = check_hls(samples, gamma, m2)
        rep.to_csv(run.path(f"hls_{k}.csv"))
        run.stamp(f"hls_{k}.csv")
        summary.append(["hls", k, json.dumps(rep.parameters, sort_keys=True), rep.max_ratio, int(rep.passed)])
    for k, tup in enumerate(cfg["inequalities", "gn"]):
        rep = check_gn(samples, *tup)
        rep.to_csv(run.path(f"gn_{k}.csv"))
        run.stamp(f"gn_{k}.csv")
        summary.append(["gn", k, json.dumps(rep.parameters, sort_keys=True), rep.max_ratio, int(rep.passed)])
    run.csv("inequalities.csv", ["check", "index", "parameters", "max_ratio", "finite"], summary)
    if not all(row[-1] for row in summary):
        raise RuntimeError("an inequality check produced a non-finite ratio")


def _weak(run: Run):
    cfg = run.cfg
    g = _grid(cfg)
    u0 = _data(cfg, g)
    p1, p2, gamma = cfg["physics", "p1"], cfg["physics", "p2"], cfg["physics", "gamma"]
    R = cfg["weak", "R"]
    zero_mode = cfg["physics", "zero_mode"]
    traj = semilinear_solve(u0, u0, p1, p2, RieszParams(gamma, g.dims, zero_mode), R * R, cfg["physics", "dt"],
                            snapshot_every=cfg["weak", "snapshot_every"],
                            blowup_factor=cfg["tolerances", "blowup_factor"])
    if traj.blown_up:
        raise RuntimeError(f"solution blew up at t = {traj.blowup_time} before R^2 = {R * R}")
    wf = weak_functional(traj, (u0, u0), TestFunctionPair.from_powers(R, p1, p2), p1, p2, gamma,
                         zero_mode=zero_mode)
    run.csv("weak.csv", ["R", "K_R", "M_R", "boundary", "linear_term", "residual", "relative_residual"],
            [[R, wf.K_R, wf.M_R, wf.boundary, wf.linear_term, wf.residual, wf.relative_residual]])


def _version() -> str:
    try:
        rev = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True,
                             text=True, timeout=5, cwd=Path(__file__).parent)
        if rev.returncode == 0 and rev.stdout.strip():
            return f"{__version__}+g{rev.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def run_config(cfg: ExperimentConfig, out_dir: str | Path | None = None, threads: int = 1,
               seed: int | None = None) -> int:
    """Run one experiment; returns the process exit status."""
    out = Path(out_dir if out_dir is not None else cfg["output", "dir"])
    out.mkdir(parents=True, exist_ok=True)
    if seed is not None:
        cfg.values[("data", "seed")] = int(seed)
    run = Run(cfg, out)
    rng = np.random.default_rng(cfg["data", "seed"])
    start = time.perf_counter()
    status, error = EXIT_OK, None
    try:
        dispatch = {
            "linear-decay": lambda: _linear_decay(run),
            "heat-decay": lambda: _heat_decay(run),
            "semilinear": lambda: _semilinear(run),
            "sweep": lambda: _sweep(run, threads),
            "besov-norm": lambda: _besov_norm(run, rng),
            "bounds-scan": lambda: _bounds_scan(run),
            "inequalities": lambda: _inequalities(run, rng),
            "weak-functional": lambda: _weak(run),
        }
        dispatch[cfg.command]()
    except Exception as exc:  # any failure after validation is a runtime failure
        status, error = EXIT_RUNTIME, f"{type(exc).__name__}: {exc}"
    manifest = {
        "command": cfg.command,
        "config_sha256": run.digest,
        "config": json.loads(cfg.canonical()),
        "version": _version(),
        "seed": cfg["data", "seed"],
        "threads": threads,
        "wall_time_s": round(time.perf_counter() - start, 6),
        "files": run.files,
        "status": status,
        "error": error,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if error:
        print(f"runtime-error: {error}".replace("\n", " "), file=sys.stderr)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dampedwave", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH", help="INI experiment config")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides output.dir)")
        p.add_argument("--threads", metavar="K", type=int, default=1)
        p.add_argument("--seed", metavar="S", type=int)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        overrides = {("data", "seed"): args.seed} if args.seed is not None else None
        cfg = load_config(args.config, args.command, overrides)
    except ConfigError as exc:
        print(f"config-error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run_config(cfg, args.out, args.threads)


if __name__ == "__main__":
    sys.exit(main())
