"""Command line front end.

Subcommands: run (one solve), sweep (Monte-Carlo sweep to CSV/SVG),
beampattern (spatial power maps for one solved state), validate-config.
Exit codes: 0 success, 1 config error, 2 runtime failure. Angles are
printed in degrees here; everything internal is radians.
"""
from __future__ import annotations

import argparse
import math
import os
import re
import sys

from . import __version__
from .algorithm import MODES, SCHEMES, RunOptions, run_scheme
from .channel import build_channels, generate_scenario
from .experiments import (ConfigError, ExperimentConfig, emit_csv,
                          parse_config, run_point, run_sweep, trial_seed,
                          watts_to_dbm)
from .precoding import PrecodingState
from .rates import NATS_TO_BITS
from .svgplot import emit_beam_pattern, emit_plot


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as config errors (exit 1)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nfsec",
                description="Near-field secure downlink experiments")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scheme_default=None):
        sp.add_argument("--config", metavar="PATH",
                        help="YAML experiment config")
        sp.add_argument("--seed", type=int, help="base RNG seed")
        sp.add_argument("--scheme", choices=SCHEMES, default=scheme_default,
                        help="transmission scheme")
        sp.add_argument("--mode", choices=MODES,
                        help="objective: s1 rate-only, s2 secrecy")
        sp.add_argument("--epsilon", type=float, metavar="X",
                        help="fix the information power fraction")
        sp.add_argument("--out", metavar="DIR", help="output directory")
        sp.add_argument("--format", choices=("csv", "svg", "both"),
                        default="both", help="output file kinds")

    common(sub.add_parser("run", help="solve one scenario and print "
                                      "the resulting rates"),
           scheme_default="proposed")
    common(sub.add_parser("sweep", help="run the configured sweep and "
                                        "write CSV/SVG results"))
    common(sub.add_parser("beampattern",
                          help="solve one scenario and map signal/AN "
                               "power over the cell"),
           scheme_default="proposed")
    vc = sub.add_parser("validate-config",
                        help="parse a config and report derived values")
    vc.add_argument("--config", metavar="PATH", help="YAML config")
    return p


def _config_from_args(args) -> ExperimentConfig:
    over = {}
    if getattr(args, "seed", None) is not None:
        over["seed"] = args.seed
    if getattr(args, "epsilon", None) is not None:
        over["epsilon_override"] = args.epsilon
    if getattr(args, "scheme", None):
        over["schemes"] = [args.scheme]
    if getattr(args, "mode", None):
        over["modes"] = [args.mode]
    if getattr(args, "out", None):
        over["out_dir"] = args.out
    return parse_config(getattr(args, "config", None), over)


def _single_run(cfg: ExperimentConfig, scheme: str, mode: str):
    scenario = generate_scenario(cfg.scenario_config(),
                                 trial_seed(cfg.seed, 0))
    channels = build_channels(scenario)
    eps = cfg.epsilon_override
    if scheme == "no-an":
        if eps is not None and eps != 1.0:
            raise ConfigError("scheme no-an has no AN power to trade; "
                              "--epsilon must be 1 or omitted")
        eps = None
    elif eps is None and scheme == "proposed" and mode == "s1":
        eps = cfg.epsilon_s1
    opts = RunOptions(mode=mode, scheme=scheme, epsilon_override=eps,
                      timing=cfg.timing)
    return scenario, channels, run_scheme(scenario, channels, opts)


_ROUND_NOTE = re.compile(r"^round (\d+): (.*)$")


def _squash_rounds(notes):
    """Collapse consecutive per-round notes with the same message into one
    'rounds a-b:' line."""
    out, run_start, run_end, msg = [], None, None, None
    def flush():
        if msg is None:
            return
        tag = (f"round {run_start}" if run_start == run_end
               else f"rounds {run_start}-{run_end}")
        out.append(f"{tag}: {msg}")
    for note in notes:
        m = _ROUND_NOTE.match(note)
        if m and m.group(2) == msg and int(m.group(1)) == run_end + 1:
            run_end = int(m.group(1))
            continue
        flush()
        if m:
            run_start = run_end = int(m.group(1))
            msg = m.group(2)
        else:
            out.append(note)
            run_start = run_end = None
            msg = None
    flush()
    return out


def _cmd_run(args) -> int:
    cfg = _config_from_args(args)
    scheme = args.scheme or "proposed"
    mode = args.mode or cfg.modes[0]
    scenario, _, rep = _single_run(cfg, scheme, mode)
    geom = scenario.geom
    print(f"scheme={rep.scheme} mode={rep.mode} seed={cfg.seed}")
    print(f"array {geom.n_x}x{geom.n_z} ({geom.n_x * geom.n_z} elements), "
          f"K={len(scenario.lues)} LUEs, E={len(scenario.eues)} EUEs, "
          f"P_b={watts_to_dbm(scenario.p_b):.6g} dBm")
    for i, ue in enumerate(scenario.lues):
        print(f"  LUE {i + 1}: theta={math.degrees(ue.theta):7.2f} deg, "
              f"d={ue.distance:6.2f} m")
    for i, ue in enumerate(scenario.eues):
        print(f"  EUE {i + 1}: theta={math.degrees(ue.theta):7.2f} deg, "
              f"d={ue.distance:6.2f} m")
    e, k = rep.min_sr_pair
    label = f"EUE {e + 1} vs LUE {k + 1}"
    print(f"min secrecy rate: {rep.min_sr_nats:.6f} nats "
          f"({rep.min_sr_nats * NATS_TO_BITS:.6f} bits)  "
          f"[bottleneck {label}]")
    print(f"epsilon={rep.epsilon:.6g}  iterations={rep.iterations}  "
          f"converged={'yes' if rep.converged else 'no'}")
    for w in _squash_rounds(rep.warnings):
        print(f"note: {w}")
    return 0


def _ensure_out(cfg: ExperimentConfig) -> str:
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    return out


def _cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    out = _ensure_out(cfg)
    rows = run_sweep(cfg)
    written = []
    if args.format in ("csv", "both"):
        written.append(emit_csv(rows, os.path.join(out, "results.csv")))
    if args.format in ("svg", "both"):
        title = ("min secrecy rate vs "
                 + ("transmit power" if cfg.sweep_var == "p_dbm"
                    else "power split"))
        written.append(emit_plot(rows, os.path.join(out, "sweep.svg"),
                                 title=title))
    n_fail = sum(1 for r in rows if math.isnan(r.min_sr_nats))
    print(f"{len(rows)} rows ({n_fail} failed)")
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_beampattern(args) -> int:
    cfg = _config_from_args(args)
    out = _ensure_out(cfg)
    scheme = args.scheme or "proposed"
    mode = args.mode or cfg.modes[0]
    scenario, _, rep = _single_run(cfg, scheme, mode)
    state = PrecodingState(w=rep.w, v=rep.v, epsilon=rep.epsilon,
                           p_b=scenario.p_b)
    prefix = os.path.join(out, f"beampattern_{scheme}_{mode}")
    files = emit_beam_pattern(scenario, state, prefix, grid=cfg.grid,
                              fmt=args.format)
    print(f"scheme={scheme} mode={mode} min_sr="
          f"{rep.min_sr_nats * NATS_TO_BITS:.6f} bits, "
          f"epsilon={rep.epsilon:.6g}")
    for path in files:
        print(f"wrote {path}")
    return 0


def _cmd_validate(args) -> int:
    cfg = parse_config(getattr(args, "config", None))
    n_b = cfg.n_x * cfg.n_z
    print("config OK")
    print(f"  array {cfg.n_x}x{cfg.n_z} ({n_b} elements), "
          f"lambda={cfg.wavelength:.6g} m")
    print(f"  K={cfg.k_lues} LUEs, E={cfg.e_eues} EUEs, trials={cfg.trials}")
    print(f"  P_b={cfg.p_dbm:g} dBm, sigma2={cfg.sigma2_dbm:g} dBm")
    print(f"  schemes: {', '.join(cfg.schemes)}; "
          f"modes: {', '.join(cfg.modes)}")
    print(f"  sweep {cfg.sweep_var}: "
          + ", ".join("%g" % v for v in cfg.sweep_values))
    return 0


_COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep,
             "beampattern": _cmd_beampattern,
             "validate-config": _cmd_validate}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except SystemExit:
        raise
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
