"""Monte Carlo experiment harness: configs in, CSV metrics out.

A run sweeps dgp regimes (phi grid), effective sample sizes (nu grid) and
methods over independent replications. Each replication simulates one series
per phi, computes the smoothed-mean target from the true means, streams the
series through every method, and records whether the band ever missed on the
evaluation horizon (t1, t2], the average band width there, and the first
rejection time against the zero null. Replications are independent tasks;
results merge in replication order, so runs are deterministic for a given
seed no matter how many workers are used.

Methods: ``ours`` (persistent multipliers), ``iid`` (same engine, chi = 0)
and ``ws`` (the confidence-sequence baseline).
"""

from __future__ import annotations

import configparser
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import AsympCs, AsympCsConfig, iid_engine_config
from .dgp import PRESET_NAMES, preset, simulate, true_smoothed_mean
from .engine import Engine, EngineConfig
from .smoothers import Smoother, SmootherParams, effective_sample_size

METHODS = ("ours", "iid", "ws")
WORKERS_ENV = "TRENDBAND_WORKERS"

METRICS_SCHEMA = "trendband-metrics-1"
POWER_SCHEMA = "trendband-power-1"


class ConfigError(ValueError):
    """Bad or unknown experiment configuration key/value."""


@dataclass(frozen=True)
class ExperimentConfig:
    preset: str = "stationary"
    phis: tuple[float, ...] = (0.3, 0.6)
    nus: tuple[float, ...] = (30.0, 50.0, 100.0)
    methods: tuple[str, ...] = ("ours", "iid", "ws")
    smoother_kind: str = "ewma"
    alpha: float = 0.1
    t0: int = 500
    t1: int = 900
    t2: int = 3500
    b1: int = 40
    b2: int = 160
    chi: float = 1.0 / 3.0
    transform: str = "student"
    replications: int = 150
    seed: int = 1
    power_start: int | None = None  # default: t1
    ws_rho_mix: float | None = None
    dgp_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.preset not in PRESET_NAMES:
            raise ConfigError(f"unknown dgp preset {self.preset!r}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown method id(s) {bad}; valid: {METHODS}")
        if self.smoother_kind not in ("ewma", "brown"):
            raise ConfigError(f"smoother must be 'ewma' or 'brown', got {self.smoother_kind!r}")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not self.phis or not self.nus or not self.methods:
            raise ConfigError("phi, nu and method grids must be nonempty")
        if self.power_start is not None and not (self.t0 <= self.power_start < self.t2):
            raise ConfigError("power_start must lie in [t0, t2)")

    @property
    def effective_power_start(self) -> int:
        return self.t1 if self.power_start is None else self.power_start

    def smoother_params(self, nu: float) -> SmootherParams:
        if self.smoother_kind == "ewma":
            return SmootherParams.from_nu(nu)
        return brown_params_from_nu(nu)

    def engine_config(self, nu: float, rep_seed) -> EngineConfig:
        return EngineConfig(
            smoother=self.smoother_params(nu), alpha=self.alpha,
            t0=self.t0, t1=self.t1, t2=self.t2, b1=self.b1, b2=self.b2,
            chi=self.chi, seed=rep_seed, transform=self.transform)


@dataclass(frozen=True)
class MetricsRow:
    method: str
    dgp: str
    phi: float
    nu: float
    uniform_coverage: float
    avg_width: float
    mc_stderr: float
    replications: int


@dataclass(frozen=True)
class PowerPoint:
    method: str
    dgp: str
    phi: float
    nu: float
    t: int
    fraction: float


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    metrics: list[MetricsRow]
    power: list[PowerPoint]


def brown_params_from_nu(nu: float) -> SmootherParams:
    """Brown smoother whose steady-state effective sample size equals nu."""
    lo, hi = 1e-6, 1.0 - 1e-6
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if effective_sample_size(SmootherParams.brown(mid)) > nu:
            lo = mid
        else:
            hi = mid
    return SmootherParams.brown(0.5 * (lo + hi))


def uniform_coverage(exceed_flags) -> float:
    """Fraction of replications whose band never missed."""
    flags = list(exceed_flags)
    if not flags:
        raise ValueError("uniform_coverage of an empty sequence")
    return sum(1 for f in flags if not f) / len(flags)


def coverage_stderr(coverage: float, n: int) -> float:
    return math.sqrt(coverage * (1.0 - coverage) / n)


def power_curve(first_reject_times, start: int, end: int) -> np.ndarray:
    """Fraction of replications that rejected by each t in (start, end]."""
    all_times = list(first_reject_times)
    if not all_times:
        raise ValueError("power_curve of an empty sequence")
    rejected = np.array(sorted(t for t in all_times if t is not None))
    grid = np.arange(start + 1, end + 1)
    counts = np.searchsorted(rejected, grid, side="right")
    return counts / len(all_times)


def jump_transform(x, h: int) -> np.ndarray:
    """Differences x_t - x_{t-h}; feeding them to the engine targets jumps."""
    x = np.asarray(x, dtype=float)
    if h < 1:
        raise ValueError(f"need h >= 1, got {h}")
    if h >= len(x):
        raise ValueError(f"need h < series length {len(x)}, got {h}")
    return x[h:] - x[:-h]


def _ws_halfwidths(cfg: ExperimentConfig, nu: float, params: SmootherParams,
                   xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Levels and half-widths of the confidence-sequence baseline.

    Returns arrays over t = t0+1 .. t2 (aligned with the engine's output).
    The variance estimate runs on one-step innovations from t0+1 onward,
    matching the engine's treatment of the burn-in.
    """
    cs = AsympCs(AsympCsConfig(alpha=cfg.alpha, nu=nu, rho_mix=cfg.ws_rho_mix,
                               variance_eta=float(params.eta)))
    sm = Smoother(params)
    levels = sm.run(xs)
    n_eval = cfg.t2 - cfg.t0
    hw = np.empty(n_eval)
    for j in range(n_eval):
        t = cfg.t0 + j + 1  # 1-based global time
        level_prev = levels[t - 2] if t >= 2 else 0.0
        hw[j] = cs.step(float(xs[t - 1]), float(level_prev))
    return levels[cfg.t0:], hw


def _replication(cfg: ExperimentConfig, rep: int) -> list[tuple]:
    """All (phi, nu, method) outcomes for one replication."""
    rows = []
    eval_lo = cfg.t1 - cfg.t0   # first index of (t1, t2] within the output block
    power_lo = cfg.effective_power_start
    for ip, phi in enumerate(cfg.phis):
        dgp = preset(cfg.preset, ar=phi, **cfg.dgp_overrides)
        sim = simulate(dgp, cfg.t2, seed=np.random.SeedSequence((cfg.seed, 0, rep, ip)))
        engine_seed = (cfg.seed, 1, rep, ip)
        for nu in cfg.nus:
            params = cfg.smoother_params(nu)
            target = true_smoothed_mean(params, sim.m)[cfg.t0:]
            for method in cfg.methods:
                if method == "ws":
                    levels, hw = _ws_halfwidths(cfg, nu, params, sim.x)
                    t_arr = np.arange(cfg.t0 + 1, cfg.t2 + 1)
                else:
                    ecfg = cfg.engine_config(nu, engine_seed)
                    if method == "iid":
                        ecfg = iid_engine_config(ecfg)
                    trace = Engine(ecfg, warmup=sim.x[:cfg.t0]).run(sim.x[cfg.t0:])
                    levels, hw, t_arr = trace.level, trace.halfwidth, trace.t

                # NaN half-widths (uncalibrated steps) compare False, i.e.
                # they can neither miss nor reject
                dev = np.abs(levels[eval_lo:] - target[eval_lo:])
                band = hw[eval_lo:]
                exceed = bool(np.any(dev > band))
                width = float(np.nanmean(2.0 * band))

                pmask = t_arr > power_lo
                reject = np.abs(levels[pmask]) > hw[pmask]
                first = int(t_arr[pmask][np.flatnonzero(reject)[0]]) if reject.any() else -1
                rows.append((ip, float(phi), float(nu), method, exceed, width, first))
    return rows


def _replication_star(args) -> list[tuple]:
    return _replication(*args)


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}")
    return max(n, 1)


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> ExperimentResult:
    """Full sweep; deterministic for a given config regardless of workers."""
    workers = default_workers() if workers is None else max(int(workers), 1)
    tasks = [(cfg, rep) for rep in range(cfg.replications)]
    if workers == 1:
        per_rep = [_replication(cfg, rep) for rep in range(cfg.replications)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_rep = list(pool.map(_replication_star, tasks,
                                    chunksize=max(1, cfg.replications // (4 * workers))))

    by_key: dict[tuple, list[tuple]] = {}
    for rep_rows in per_rep:
        for ip, phi, nu, method, exceed, width, first in rep_rows:
            by_key.setdefault((ip, phi, nu, method), []).append((exceed, width, first))

    metrics, power = [], []
    start, end = cfg.effective_power_start, cfg.t2
    grid = np.arange(start + 1, end + 1)
    for (ip, phi, nu, method), outs in sorted(by_key.items()):
        exceeds = [o[0] for o in outs]
        cov = uniform_coverage(exceeds)
        widths = [o[1] for o in outs]
        firsts = [None if o[2] < 0 else o[2] for o in outs]
        metrics.append(MetricsRow(
            method=method, dgp=cfg.preset, phi=phi, nu=nu,
            uniform_coverage=cov, avg_width=float(np.mean(widths)),
            mc_stderr=coverage_stderr(cov, len(outs)), replications=len(outs)))
        frac = power_curve(firsts, start, end)
        power.extend(PowerPoint(method, cfg.preset, phi, nu, int(t), float(f))
                     for t, f in zip(grid, frac))
    return ExperimentResult(config=cfg, metrics=metrics, power=power)


# -- CSV emission ---------------------------------------------------------


def write_metrics_csv(path, rows: list[MetricsRow]) -> None:
    with open(path, "w") as fh:
        fh.write(f"# schema: {METRICS_SCHEMA}\n")
        fh.write("method,dgp,phi,nu,uniform_coverage,avg_width,mc_stderr,replications\n")
        for r in rows:
            fh.write(f"{r.method},{r.dgp},{r.phi!r},{r.nu!r},{r.uniform_coverage!r},"
                     f"{r.avg_width!r},{r.mc_stderr!r},{r.replications}\n")


def write_power_csv(path, points: list[PowerPoint]) -> None:
    with open(path, "w") as fh:
        fh.write(f"# schema: {POWER_SCHEMA}\n")
        fh.write("method,dgp,phi,nu,t,fraction\n")
        for p in points:
            fh.write(f"{p.method},{p.dgp},{p.phi!r},{p.nu!r},{p.t},{p.fraction!r}\n")


# -- config-file ingestion --------------------------------------------------

_SCHEMA = {
    "dgp": {"preset", "phi", "mu", "slope", "amplitude", "period", "phase",
            "shock_prob", "shock_scale", "sigma", "innovation", "innovation_df"},
    "engine": {"smoother", "alpha", "nu", "eta", "t0", "t1", "t2", "b1", "b2",
               "chi", "transform", "ws_rho_mix"},
    "run": {"methods", "replications", "seed", "power_start", "output"},
}

_DGP_OVERRIDE_KEYS = ("mu", "slope", "amplitude", "period", "phase",
                      "shock_prob", "shock_scale", "sigma", "innovation_df")


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(v.strip()) for v in raw.split(",") if v.strip())


def parse_config(text: str, overrides: list[str] = ()) -> tuple[ExperimentConfig, str | None]:
    """Parse the INI-style experiment file; unknown keys are errors.

    overrides are ``section.key=value`` strings applied on top. Returns the
    config and the output directory (if given).
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        key, value = item.split("=", 1)
        section, name = key.split(".", 1)
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section.strip(), name.strip(), value.strip())

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")

    kw: dict = {}
    out_dir = None
    dgp_overrides: dict = {}
    if parser.has_section("dgp"):
        sec = parser["dgp"]
        if "preset" in sec:
            kw["preset"] = sec["preset"].strip()
        if "phi" in sec:
            kw["phis"] = _floats(sec["phi"])
        for key in _DGP_OVERRIDE_KEYS:
            if key in sec:
                dgp_overrides[key] = float(sec[key])
        if "innovation" in sec:
            dgp_overrides["innovation"] = sec["innovation"].strip()
    if parser.has_section("engine"):
        sec = parser["engine"]
        if "nu" in sec and "eta" in sec:
            raise ConfigError("give either an nu grid or an eta grid, not both")
        if "nu" in sec:
            kw["nus"] = _floats(sec["nu"])
        if "eta" in sec:
            kw["nus"] = tuple((2.0 - e) / e for e in _floats(sec["eta"]))
        if "smoother" in sec:
            kw["smoother_kind"] = sec["smoother"].strip()
        if "alpha" in sec:
            kw["alpha"] = float(sec["alpha"])
        for key in ("t0", "t1", "t2", "b1", "b2"):
            if key in sec:
                kw[key] = int(sec[key])
        if "chi" in sec:
            kw["chi"] = float(sec["chi"])
        if "transform" in sec:
            kw["transform"] = sec["transform"].strip()
        if "ws_rho_mix" in sec:
            kw["ws_rho_mix"] = float(sec["ws_rho_mix"])
    if parser.has_section("run"):
        sec = parser["run"]
        if "methods" in sec:
            kw["methods"] = tuple(m.strip() for m in sec["methods"].split(",") if m.strip())
        if "replications" in sec:
            kw["replications"] = int(sec["replications"])
        if "seed" in sec:
            kw["seed"] = int(sec["seed"])
        if "power_start" in sec:
            kw["power_start"] = int(sec["power_start"])
        if "output" in sec:
            out_dir = sec["output"].strip()
    if dgp_overrides:
        kw["dgp_overrides"] = dgp_overrides
    try:
        cfg = ExperimentConfig(**kw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg, out_dir
