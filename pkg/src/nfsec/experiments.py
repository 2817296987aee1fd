"""Config parsing, Monte-Carlo sweeps, and CSV emission.

Configs are flat YAML; unknown keys are rejected so typos fail loudly.
Every run is a pure function of (config, seed): scenarios reuse one seeded
draw per trial across schemes and sweep points, wall_ms is reported as 0.0
unless timing is enabled, and rows are sorted before writing, so repeated
invocations produce byte-identical CSV files.
"""
from __future__ import annotations

import concurrent.futures
import dataclasses
import math
import os
import sys
from dataclasses import dataclass

import numpy as np
import yaml

from .algorithm import MODES, SCHEMES, RunOptions, run_scheme
from .channel import ScenarioConfig, build_channels, generate_scenario
from .rates import NATS_TO_BITS

SPEED_OF_LIGHT = 3.0e8  # nominal, keeps lambda = 0.15 m at 2 GHz

CSV_HEADER = ("trial,scheme,mode,sweep_var,sweep_value,min_sr_nats,"
              "min_sr_bits,epsilon,iterations,converged,wall_ms")

DEFAULTS = {
    "seed": 1,
    "trials": 5,
    "carrier_ghz": 2.0,
    "sigma2_dbm": -96.0,
    "p_dbm": 0.0,
    "n_x": 9,
    "n_z": 9,
    "k_lues": 4,
    "e_eues": 4,
    "cell": [100.0, 100.0],
    "bs_xy": [50.0, 100.0],
    "lue_distance": [10.0, 30.0],
    "eue_ratio": 0.5,
    "collinear": True,
    "nlos_paths": 0,
    "min_theta_sep": 0.25,
    "schemes": ["proposed", "no-an", "mrt-an", "ffb"],
    "modes": ["s2"],
    "epsilon_override": None,
    "epsilon_s1": 0.5,
    "sweep_var": "p_dbm",
    "sweep_values": [0.0, 5.0, 10.0, 15.0, 20.0],
    "timing": False,
    "workers": 1,
    "grid": [60, 60],
    "out_dir": "out",
}


class ConfigError(ValueError):
    """Raised for malformed or out-of-range experiment configs."""


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (float(dbm) / 10.0) * 1e-3


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts / 1e-3)


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    trials: int
    carrier_ghz: float
    sigma2_dbm: float
    p_dbm: float
    n_x: int
    n_z: int
    k_lues: int
    e_eues: int
    cell: tuple
    bs_xy: tuple
    lue_distance: tuple
    eue_ratio: float
    collinear: bool
    nlos_paths: int
    min_theta_sep: float
    schemes: tuple
    modes: tuple
    epsilon_override: float | None
    epsilon_s1: float
    sweep_var: str
    sweep_values: tuple
    timing: bool
    workers: int
    grid: tuple
    out_dir: str

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / (self.carrier_ghz * 1e9)

    @property
    def sigma2_watts(self) -> float:
        return dbm_to_watts(self.sigma2_dbm)

    @property
    def p_watts(self) -> float:
        return dbm_to_watts(self.p_dbm)

    def scenario_config(self) -> ScenarioConfig:
        return ScenarioConfig(
            n_x=self.n_x, n_z=self.n_z, wavelength=self.wavelength,
            k_lues=self.k_lues, e_eues=self.e_eues, cell=tuple(self.cell),
            bs_xy=tuple(self.bs_xy), lue_distance=tuple(self.lue_distance),
            eue_ratio=self.eue_ratio, collinear=self.collinear,
            nlos_paths=self.nlos_paths, min_theta_sep=self.min_theta_sep,
            p_b=self.p_watts, sigma2=self.sigma2_watts)


def _require(cond: bool, key: str, msg: str):
    if not cond:
        raise ConfigError(f"config key {key!r}: {msg}")


def parse_config(source: str | None = None, overrides: dict | None = None
                 ) -> ExperimentConfig:
    """Build a validated config from a YAML file path or YAML text.

    source=None uses pure defaults; overrides (CLI flags) win over file
    values, which win over defaults.
    """
    raw = {}
    if source is not None:
        if os.path.exists(source):
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        else:
            text = source
        try:
            loaded = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"config is not valid YAML: {exc}") from exc
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError("config root must be a mapping")
        raw = loaded

    unknown = sorted(set(raw) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    merged = {**DEFAULTS, **raw}
    if overrides:
        bad = sorted(set(overrides) - set(DEFAULTS))
        if bad:
            raise ConfigError(f"unknown override keys: {', '.join(bad)}")
        merged.update({k: v for k, v in overrides.items() if v is not None})

    try:
        cfg = ExperimentConfig(
            seed=int(merged["seed"]),
            trials=int(merged["trials"]),
            carrier_ghz=float(merged["carrier_ghz"]),
            sigma2_dbm=float(merged["sigma2_dbm"]),
            p_dbm=float(merged["p_dbm"]),
            n_x=int(merged["n_x"]),
            n_z=int(merged["n_z"]),
            k_lues=int(merged["k_lues"]),
            e_eues=int(merged["e_eues"]),
            cell=tuple(float(x) for x in merged["cell"]),
            bs_xy=tuple(float(x) for x in merged["bs_xy"]),
            lue_distance=tuple(float(x) for x in merged["lue_distance"]),
            eue_ratio=float(merged["eue_ratio"]),
            collinear=bool(merged["collinear"]),
            nlos_paths=int(merged["nlos_paths"]),
            min_theta_sep=float(merged["min_theta_sep"]),
            schemes=tuple(merged["schemes"]),
            modes=tuple(str(m).lower() for m in merged["modes"]),
            epsilon_override=(None if merged["epsilon_override"] is None
                              else float(merged["epsilon_override"])),
            epsilon_s1=float(merged["epsilon_s1"]),
            sweep_var=str(merged["sweep_var"]),
            sweep_values=tuple(float(v) for v in merged["sweep_values"]),
            timing=bool(merged["timing"]),
            workers=int(merged["workers"]),
            grid=tuple(int(g) for g in merged["grid"]),
            out_dir=str(merged["out_dir"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config value: {exc}") from exc

    _require(cfg.trials >= 1, "trials", "must be at least 1")
    _require(cfg.carrier_ghz > 0, "carrier_ghz", "must be positive")
    _require(cfg.n_x >= 1 and cfg.n_x % 2 == 1, "n_x",
             "must be an odd positive integer")
    _require(cfg.n_z >= 1 and cfg.n_z % 2 == 1, "n_z",
             "must be an odd positive integer")
    _require(cfg.k_lues >= 1, "k_lues", "must be at least 1")
    _require(cfg.e_eues >= 1, "e_eues", "must be at least 1")
    _require(len(cfg.cell) == 2 and min(cfg.cell) > 0, "cell",
             "must be two positive lengths")
    _require(len(cfg.bs_xy) == 2, "bs_xy", "must be an (x, y) pair")
    _require(len(cfg.lue_distance) == 2
             and 0 < cfg.lue_distance[0] <= cfg.lue_distance[1],
             "lue_distance", "must be 0 < min <= max")
    _require(cfg.eue_ratio > 0, "eue_ratio",
             "must be positive (EUE distance would be <= 0)")
    _require(cfg.nlos_paths >= 0, "nlos_paths", "must be non-negative")
    for s in cfg.schemes:
        _require(s in SCHEMES, "schemes", f"unknown scheme {s!r}")
    for m in cfg.modes:
        _require(m in MODES, "modes", f"unknown mode {m!r}")
    _require(len(cfg.schemes) >= 1, "schemes", "must not be empty")
    _require(len(cfg.modes) >= 1, "modes", "must not be empty")
    if cfg.epsilon_override is not None:
        _require(0 < cfg.epsilon_override <= 1, "epsilon_override",
                 "must lie in (0, 1]")
    _require(0 < cfg.epsilon_s1 <= 1, "epsilon_s1", "must lie in (0, 1]")
    _require(cfg.sweep_var in ("epsilon", "p_dbm"), "sweep_var",
             "must be 'epsilon' or 'p_dbm'")
    _require(len(cfg.sweep_values) >= 1, "sweep_values", "must not be empty")
    for v in cfg.sweep_values:
        _require(math.isfinite(v), "sweep_values", "values must be finite")
        if cfg.sweep_var == "epsilon":
            _require(0 < v <= 1, "sweep_values",
                     f"epsilon value {v} outside (0, 1]")
    _require(cfg.workers >= 1, "workers", "must be at least 1")
    _require(len(cfg.grid) == 2 and min(cfg.grid) >= 2, "grid",
             "must be two sizes >= 2")
    return cfg


@dataclass(frozen=True)
class ResultRow:
    trial: int
    scheme: str
    mode: str
    sweep_var: str
    sweep_value: float
    min_sr_nats: float
    min_sr_bits: float
    epsilon: float
    iterations: int
    converged: bool
    wall_ms: float


def trial_seed(base_seed: int, trial: int) -> int:
    """Per-trial scenario seed, stable across sweep points and schemes."""
    return int(np.random.SeedSequence([int(base_seed), int(trial)])
               .generate_state(1)[0])


def _override_for(cfg: ExperimentConfig, scheme: str, mode: str,
                  sweep_value: float) -> float | None:
    """Which fixed eps (if any) a run gets.

    Swept epsilon pins every scheme except no-an (definitionally eps = 1).
    Otherwise an explicit global override wins, and proposed runs in s1
    default to the configured s1 split (the rate-only objective cannot
    pick an interior eps on its own).
    """
    if scheme == "no-an":
        return None
    if cfg.sweep_var == "epsilon":
        return float(sweep_value)
    if cfg.epsilon_override is not None:
        return cfg.epsilon_override
    if scheme == "proposed" and mode == "s1":
        return cfg.epsilon_s1
    return None


def run_point(cfg: ExperimentConfig, trial: int, scheme: str, mode: str,
              sweep_value: float, scenario=None, channels=None) -> ResultRow:
    """Run one (trial, scheme, mode, sweep point); any CSV row is
    reproducible through this entry alone."""
    if scenario is None:
        scenario = generate_scenario(cfg.scenario_config(),
                                     trial_seed(cfg.seed, trial))
    if channels is None:
        channels = build_channels(scenario)
    if cfg.sweep_var == "p_dbm":
        scenario = dataclasses.replace(scenario,
                                       p_b=dbm_to_watts(sweep_value))
    opts = RunOptions(mode=mode, scheme=scheme,
                      epsilon_override=_override_for(cfg, scheme, mode,
                                                     sweep_value),
                      timing=cfg.timing)
    report = run_scheme(scenario, channels, opts)
    return ResultRow(
        trial=trial, scheme=scheme, mode=mode, sweep_var=cfg.sweep_var,
        sweep_value=float(sweep_value), min_sr_nats=report.min_sr_nats,
        min_sr_bits=report.min_sr_nats * NATS_TO_BITS,
        epsilon=report.epsilon, iterations=report.iterations,
        converged=report.converged, wall_ms=report.wall_ms)


def _run_trial(cfg: ExperimentConfig, trial: int) -> list:
    rows = []
    scenario = generate_scenario(cfg.scenario_config(),
                                 trial_seed(cfg.seed, trial))
    channels = build_channels(scenario)
    for sweep_value in cfg.sweep_values:
        for scheme in cfg.schemes:
            for mode in cfg.modes:
                try:
                    rows.append(run_point(cfg, trial, scheme, mode,
                                          sweep_value, scenario, channels))
                except Exception as exc:  # keep the sweep alive
                    print(f"warning: trial {trial} {scheme}/{mode} at "
                          f"{cfg.sweep_var}={sweep_value}: {exc}",
                          file=sys.stderr)
                    rows.append(ResultRow(
                        trial=trial, scheme=scheme, mode=mode,
                        sweep_var=cfg.sweep_var,
                        sweep_value=float(sweep_value),
                        min_sr_nats=float("nan"),
                        min_sr_bits=float("nan"), epsilon=float("nan"),
                        iterations=0, converged=False, wall_ms=0.0))
    return rows


def run_sweep(cfg: ExperimentConfig) -> list:
    """All (trial, sweep point, scheme, mode) rows, deterministically sorted.

    Trials are independent; with workers > 1 they run in separate processes
    and the ordering is restored afterwards, so the output is identical to
    the serial run.
    """
    rows = []
    if cfg.workers > 1 and cfg.trials > 1:
        with concurrent.futures.ProcessPoolExecutor(
                max_workers=cfg.workers) as pool:
            for chunk in pool.map(_run_trial, [cfg] * cfg.trials,
                                  range(cfg.trials)):
                rows.extend(chunk)
    else:
        for trial in range(cfg.trials):
            rows.extend(_run_trial(cfg, trial))
    return sort_rows(rows)


def sort_rows(rows: list) -> list:
    return sorted(rows, key=lambda r: (r.scheme, r.mode, r.sweep_value,
                                       r.trial))


def _fmt(x: float) -> str:
    return "%.9g" % x


def emit_csv(rows: list, path: str) -> str:
    """Write the result table; header and 9-significant-digit floats."""
    if not rows:
        raise ValueError("no result rows to write")
    lines = [CSV_HEADER]
    for r in sort_rows(rows):
        lines.append(",".join([
            str(r.trial), r.scheme, r.mode, r.sweep_var,
            _fmt(r.sweep_value), _fmt(r.min_sr_nats), _fmt(r.min_sr_bits),
            _fmt(r.epsilon), str(r.iterations),
            "true" if r.converged else "false", _fmt(r.wall_ms)]))
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path!r}: {exc}") from exc
    return path


def read_csv_rows(path: str) -> list:
    """Parse a file produced by emit_csv back into ResultRow objects."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path!r} is not a sweep CSV (bad header)")
    rows = []
    for ln in lines[1:]:
        f = ln.split(",")
        rows.append(ResultRow(
            trial=int(f[0]), scheme=f[1], mode=f[2], sweep_var=f[3],
            sweep_value=float(f[4]), min_sr_nats=float(f[5]),
            min_sr_bits=float(f[6]), epsilon=float(f[7]),
            iterations=int(f[8]), converged=f[9] == "true",
            wall_ms=float(f[10])))
    return rows


def mean_series(rows: list) -> dict:
    """{(scheme, mode): [(sweep_value, mean min_sr_bits), ...]} with NaN
    failure rows dropped; the plotting input."""
    acc: dict = {}
    for r in rows:
        if math.isnan(r.min_sr_bits):
            continue
        acc.setdefault((r.scheme, r.mode), {}).setdefault(
            r.sweep_value, []).append(r.min_sr_bits)
    out = {}
    for key, by_x in acc.items():
        out[key] = [(x, sum(v) / len(v)) for x, v in sorted(by_x.items())]
    return out
