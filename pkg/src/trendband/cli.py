"""Command-line interface.

Subcommands:
  simulate   emit a simulated series as CSV (t, x, m)
  band       stream a series file (or stdin) through one method, emit bands
  run        full Monte Carlo experiment from a config file
  selftest   quick oracle suite; exit code reflects the outcome
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from ._backend import available_backends
from .baselines import AsympCs, AsympCsConfig, iid_engine_config
from .dgp import PRESET_NAMES, preset, read_series, simulate, write_series
from .engine import Engine, EngineConfig
from .harness import (
    ConfigError,
    default_workers,
    parse_config,
    run_experiment,
    write_metrics_csv,
    write_power_csv,
)
from .smoothers import Smoother, SmootherParams, effective_sample_size


def _add_simulate(sub):
    p = sub.add_parser("simulate", help="emit a simulated series")
    p.add_argument("--preset", choices=PRESET_NAMES, default="stationary")
    p.add_argument("--phi", type=float, default=0.3, help="AR(1) coefficient")
    p.add_argument("--n", type=int, default=3500, help="series length")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--slope", type=float, default=None)
    p.add_argument("--amplitude", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--innovation", choices=("gaussian", "t"), default=None)
    p.add_argument("--innovation-df", type=float, default=None)
    p.add_argument("-o", "--out", default="-", help="output path, '-' for stdout")


def _add_band(sub):
    p = sub.add_parser("band", help="stream a series through one method")
    p.add_argument("--input", default="-", help="series file, '-' for stdin")
    p.add_argument("--method", choices=("ours", "iid", "ws"), default="ours")
    p.add_argument("--eta", type=float, default=None, help="EWMA smoothing parameter")
    p.add_argument("--nu", type=float, default=None, help="effective sample size")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--t0", type=int, default=500)
    p.add_argument("--t1", type=int, default=900)
    p.add_argument("--t2", type=int, default=None, help="default: series length")
    p.add_argument("--b1", type=int, default=40)
    p.add_argument("--b2", type=int, default=160)
    p.add_argument("--chi", type=float, default=1.0 / 3.0)
    p.add_argument("--transform", choices=("student", "unit_student", "identity"), default="student")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", default="-")


def _add_run(sub):
    p = sub.add_parser("run", help="run a Monte Carlo experiment")
    p.add_argument("--config", required=True, help="INI-style experiment file")
    p.add_argument("--set", action="append", default=[], metavar="SEC.KEY=VAL",
                   help="override a config entry (repeatable)")
    p.add_argument("--workers", type=int, default=None,
                   help="parallel replications (default: TRENDBAND_WORKERS, else 1)")
    p.add_argument("-o", "--out", default=None, help="output directory")


def _add_selftest(sub):
    sub.add_parser("selftest", help="run the quick oracle suite")


def _open_out(path):
    return sys.stdout if path == "-" else open(path, "w")


def cmd_simulate(args) -> int:
    overrides = {}
    for key in ("slope", "amplitude", "sigma", "innovation", "innovation_df"):
        val = getattr(args, key)
        if val is not None:
            overrides[key] = val
    params = preset(args.preset, ar=args.phi, **overrides)
    out = simulate(params, args.n, seed=args.seed)
    if args.out == "-":
        sys.stdout.write("t,x,m\n")
        for t in range(args.n):
            sys.stdout.write(f"{t + 1},{float(out.x[t])!r},{float(out.m[t])!r}\n")
    else:
        write_series(args.out, out.x, out.m)
    return 0


def cmd_band(args) -> int:
    xs = read_series(sys.stdin if args.input == "-" else args.input)
    t2 = len(xs) if args.t2 is None else args.t2
    if args.eta is not None and args.nu is not None:
        raise ConfigError("give --eta or --nu, not both")
    if args.eta is not None:
        params = SmootherParams.ewma(args.eta)
    else:
        params = SmootherParams.from_nu(args.nu if args.nu is not None else 50.0)
    if t2 > len(xs):
        raise ConfigError(f"t2={t2} exceeds series length {len(xs)}")
    if args.t0 >= t2 or args.t1 >= t2:
        raise ConfigError(f"need t0 < t1 < t2={t2}; adjust --t0/--t1 for this series")

    fh = _open_out(args.out)
    try:
        fh.write("t,level,lo,hi\n")
        if args.method == "ws":
            nu = effective_sample_size(params)
            cs = AsympCs(AsympCsConfig(alpha=args.alpha, nu=nu,
                                       variance_eta=params.eta))
            sm = Smoother(params)
            level_prev = 0.0
            for t in range(1, t2 + 1):
                level = sm.update(float(xs[t - 1]))
                if t > args.t0:
                    hw = cs.step(float(xs[t - 1]), level_prev)
                    if t > args.t1:
                        fh.write(f"{t},{level!r},{level - hw!r},{level + hw!r}\n")
                    else:
                        fh.write(f"{t},{level!r},,\n")
                else:
                    fh.write(f"{t},{level!r},,\n")
                level_prev = level
        else:
            cfg = EngineConfig(smoother=params, alpha=args.alpha, t0=args.t0,
                               t1=args.t1, t2=t2, b1=args.b1, b2=args.b2,
                               chi=args.chi, seed=args.seed,
                               transform=args.transform)
            if args.method == "iid":
                cfg = iid_engine_config(cfg)
            sm = Smoother(params)
            for t in range(1, args.t0 + 1):
                level = sm.update(float(xs[t - 1]))
                fh.write(f"{t},{level!r},,\n")
            eng = Engine(cfg, warmup=xs[:args.t0])
            trace = eng.run(xs[args.t0:t2])
            for i in range(len(trace)):
                level = float(trace.level[i])
                hw = float(trace.halfwidth[i])
                if np.isfinite(hw):
                    fh.write(f"{int(trace.t[i])},{level!r},{level - hw!r},{level + hw!r}\n")
                else:
                    fh.write(f"{int(trace.t[i])},{level!r},,\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_run(args) -> int:
    with open(args.config) as fh:
        text = fh.read()
    cfg, out_dir = parse_config(text, overrides=args.set)
    if args.out is not None:
        out_dir = args.out
    if out_dir is None:
        raise ConfigError("no output directory: set [run] output or pass --out")
    os.makedirs(out_dir, exist_ok=True)
    workers = args.workers if args.workers is not None else default_workers()
    result = run_experiment(cfg, workers=workers)
    metrics_path = os.path.join(out_dir, "metrics.csv")
    power_path = os.path.join(out_dir, "power.csv")
    write_metrics_csv(metrics_path, result.metrics)
    write_power_csv(power_path, result.power)
    for row in result.metrics:
        print(f"{row.method:5s} {row.dgp:15s} phi={row.phi:<4g} nu={row.nu:<6g} "
              f"coverage={row.uniform_coverage:.3f} width={row.avg_width:.4f}")
    print(f"wrote {metrics_path} and {power_path}")
    return 0


def cmd_selftest(args) -> int:
    from . import selftest

    return selftest.run()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trendband",
        description="Streaming bootstrap confidence bands for smoothed trends")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__} "
                                f"(backends: {', '.join(available_backends())})")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_simulate(sub)
    _add_band(sub)
    _add_run(sub)
    _add_selftest(sub)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"simulate": cmd_simulate, "band": cmd_band,
               "run": cmd_run, "selftest": cmd_selftest}[args.command]
    try:
        return handler(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
