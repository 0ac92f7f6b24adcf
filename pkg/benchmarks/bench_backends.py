"""Throughput comparison of the compiled kernel vs the numpy fallback.

Usage: python benchmarks/bench_backends.py [--steps N] [--replicates B ...]
"""

import argparse
import time

import numpy as np

from trendband._backend import available_backends
from trendband.engine import Engine, EngineConfig
from trendband.smoothers import SmootherParams


def time_run(backend, params, n_steps, b_total, nu=None):
    b1 = max(2, b_total // 5)
    cfg = EngineConfig(smoother=params, alpha=0.1, t0=100, t1=200,
                       t2=100 + n_steps, b1=b1, b2=b_total - b1, seed=1, nu=nu)
    rng = np.random.default_rng(0)
    warm = rng.standard_normal(100)
    xs = rng.standard_normal(n_steps)
    eng = Engine(cfg, warmup=warm, backend=backend)
    t0 = time.perf_counter()
    eng.run(xs)
    return time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--replicates", type=int, nargs="+", default=[50, 200, 800])
    args = ap.parse_args()

    backends = available_backends()
    smoothers = [("ewma", SmootherParams.ewma(0.1), None),
                 ("brown", SmootherParams.brown(0.1), None),
                 ("holt_winters", SmootherParams.holt_winters(0.3, 0.1, 0.2, 24), 20.0)]

    print(f"backends: {', '.join(backends)}; {args.steps} steps per case\n")
    print(f"{'smoother':14s} {'B':>5s} " +
          " ".join(f"{b + ' steps/s':>16s}" for b in backends) + "  speedup")
    for name, params, nu in smoothers:
        for b_total in args.replicates:
            rates = []
            for backend in backends:
                dt = time_run(backend, params, args.steps, b_total, nu)
                rates.append(args.steps / dt)
            speedup = rates[0] / rates[-1] if len(rates) > 1 else 1.0
            print(f"{name:14s} {b_total:5d} " +
                  " ".join(f"{r:16,.0f}" for r in rates) +
                  (f"  {speedup:5.1f}x" if len(rates) > 1 else ""))


if __name__ == "__main__":
    main()
