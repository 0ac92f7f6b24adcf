"""Quick oracle suite behind `trendband selftest`.

Each check recomputes a quantity through an independent route and compares.
This is a smoke battery, not the full test suite (run pytest for that).
"""

from __future__ import annotations

import math

import numpy as np

from . import numerics as nm
from ._backend import available_backends
from .dgp import preset, simulate
from .engine import Engine, EngineConfig, bootstrap_delta_direct
from .multipliers import transform
from .numerics import replicate_streams
from .smoothers import Smoother, SmootherParams, weights


def _check_normal_roundtrip():
    rng = np.random.default_rng(1)
    worst = 0.0
    for p in rng.uniform(1e-6, 1 - 1e-6, 500):
        worst = max(worst, abs(nm.std_normal_cdf(nm.std_normal_quantile(p)) - p))
    return worst <= 1e-10, f"max roundtrip error {worst:.2e}"

def _check_t_quantile():
    got = nm.unit_variance_t_quantile(0.975, 4.0)
    return abs(got - 1.96325) <= 1e-4, f"uv t4 quantile {got:.6f}"

def _check_smoother_closed_form():
    rng = np.random.default_rng(2)
    xs = rng.standard_normal(100)
    for params in (SmootherParams.ewma(0.3), SmootherParams.brown(0.45)):
        rec = Smoother(params).run(xs)
        for t in (1, 10, 100):
            direct = float(weights(params, t) @ xs[:t])
            if abs(rec[t - 1] - direct) > 1e-10:
                return False, f"{params.kind} mismatch at t={t}"
    return True, "recursion equals weight sums"

def _check_online_vs_direct():
    rng = np.random.default_rng(3)
    params = SmootherParams.ewma(0.4)
    cfg = EngineConfig(params, alpha=0.1, t0=0, t1=8, t2=50, b1=2, b2=3, seed=4)
    xs = rng.standard_normal(50)
    eng = Engine(cfg, warmup=[])
    gens = replicate_streams(4, cfg.b_total)
    scale = math.sqrt(1 - eng.rho**2)
    factor = math.sqrt(eng.dof / (eng.dof - 2.0))
    v = np.empty((cfg.b_total, 50))
    for b in range(cfg.b_total):
        z = 0.0
        for j, xi in enumerate(gens[b].standard_normal(50)):
            z = eng.rho * z + scale * xi
            v[b, j] = factor * transform(z, eng.dof)
    lagged = np.concatenate([[0.0], Smoother(params).run(xs)[:-1]])
    worst = 0.0
    for j in range(50):
        eng.step(float(xs[j]))
        deltas = eng.replicate_errors()
        for b in range(cfg.b_total):
            direct = bootstrap_delta_direct(params, v[b], xs, lagged, j + 1)
            worst = max(worst, abs(direct - deltas[b]))
    return worst <= 1e-9, f"max |online - direct| = {worst:.2e}"

def _check_dgp_mean():
    out = simulate(preset("trend_seasonal", ar=0.3), 500, seed=5)
    i = np.arange(1, 501)
    ref = 1e-3 * i + 0.4 * np.sin(2 * np.pi * i / 400.0)
    worst = float(np.abs(out.m - ref).max())
    return worst <= 1e-12, f"mean path deviation {worst:.2e}"

def _check_determinism():
    cfg = EngineConfig(SmootherParams.ewma(0.2), alpha=0.1, t0=10, t1=20,
                       t2=120, b1=5, b2=10, seed=6)
    rng = np.random.default_rng(7)
    warm = rng.standard_normal(10)
    xs = rng.standard_normal(110)
    a = Engine(cfg, warmup=warm).run(xs)
    b = Engine(cfg, warmup=warm).run(xs)
    same = (np.array_equal(a.level, b.level)
            and np.array_equal(a.sigma_star, b.sigma_star))
    return same, "identical traces for identical seeds"

def _check_backends():
    backends = available_backends()
    if len(backends) < 2:
        return True, "compiled kernel not built; python fallback only"
    cfg = EngineConfig(SmootherParams.ewma(0.3), alpha=0.1, t0=10, t1=20,
                       t2=150, b1=8, b2=12, seed=8)
    rng = np.random.default_rng(9)
    warm = rng.standard_normal(10)
    xs = rng.standard_normal(140)
    a = Engine(cfg, warmup=warm, backend="python").run(xs)
    b = Engine(cfg, warmup=warm, backend="cython").run(xs)
    ok = np.array_equal(a.level, b.level) and np.allclose(
        a.sigma_star, b.sigma_star, rtol=1e-12, atol=1e-300)
    return ok, "python and cython kernels agree"


CHECKS = [
    ("normal cdf/quantile roundtrip", _check_normal_roundtrip),
    ("unit-variance t quantile", _check_t_quantile),
    ("smoother closed forms", _check_smoother_closed_form),
    ("online bootstrap vs direct sum", _check_online_vs_direct),
    ("simulator mean path", _check_dgp_mean),
    ("seeded determinism", _check_determinism),
    ("backend agreement", _check_backends),
]


def run() -> int:
    failures = 0
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failure, keep going
            ok, detail = False, f"raised {exc!r}"
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        failures += not ok
    print(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed")
    return 1 if failures else 0
