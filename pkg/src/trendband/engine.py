"""Streaming bootstrap engine: bands and tests with O(1) work per observation.

One engine owns a main smoother plus B = b1 + b2 bootstrap replicates. Each
step multiplies the lagged residual x_t - level(t-1) by every replicate's
heavy-tailed AR(1) multiplier, advances the replicate smoothers on those
synthetic residuals, estimates the bootstrap scale sigma* from the first b1
replicates, and tracks running maxima of the standardized errors over the
remaining b2. Critical values are refreshed at doubling block boundaries
t0 + 2^k (t1 - t0) as the empirical (1 - alpha/K)-quantile of the maxima,
where K = ceil(log2((t2 - t0) / (t1 - t0))) splits the error budget.

Memory is O(B) regardless of how long the stream runs; bands appear once the
first calibration block completes (t > t1).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ._backend import get_backend
from ._pykernel import KIND_BROWN, KIND_EWMA, KIND_HW
from .multipliers import get_transform_table, persistence
from .numerics import replicate_streams
from .smoothers import (
    HOLT_WINTERS,
    Smoother,
    SmootherParams,
    UnsupportedKindError,
    effective_sample_size,
    weights,
)

SNAPSHOT_FORMAT = "trendband-engine-state"
SNAPSHOT_VERSION = 1

_KIND_IDS = {"ewma": KIND_EWMA, "brown": KIND_BROWN, "holt_winters": KIND_HW}

# "student" is the algorithm's map: the plain t quantile after the normal
# CDF. Its variance dof/(dof - 2) = 1 + 2/nu^(1/3) acts as the small-sample
# band inflation and fades as nu grows. "unit_student" is the theory's
# variance-one normalization; "identity" removes the map (ablation).
TRANSFORMS = ("student", "unit_student", "identity")


class NotCalibratedError(RuntimeError):
    """Band or test requested before the first calibration block completed."""


class SequenceExhaustedError(RuntimeError):
    """Engine asked to step past its configured end time t2."""


@dataclass(frozen=True)
class EngineConfig:
    smoother: SmootherParams
    alpha: float
    t0: int
    t1: int
    t2: int
    b1: int = 20
    b2: int = 80
    chi: float = 1.0 / 3.0
    seed: int = 0
    nu: float | None = None
    transform: str = "student"

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not (0 <= self.t0 < self.t1 < self.t2):
            raise ValueError(f"need 0 <= t0 < t1 < t2, got {self.t0}, {self.t1}, {self.t2}")
        if self.b1 < 2:
            raise ValueError(f"b1 must be >= 2 for an empirical variance, got {self.b1}")
        if self.b2 < 1:
            raise ValueError(f"b2 must be >= 1, got {self.b2}")
        if self.transform not in TRANSFORMS:
            raise ValueError(f"transform must be one of {TRANSFORMS}, got {self.transform!r}")

    @property
    def b_total(self) -> int:
        return self.b1 + self.b2

    @property
    def n_blocks(self) -> int:
        """K: number of alpha-budget slices, from exact integer arithmetic."""
        span = self.t1 - self.t0
        k = 0
        while self.t0 + (span << k) < self.t2:
            k += 1
        return max(k, 1)

    @property
    def boundaries(self) -> list[int]:
        """Recalibration times t0 + 2^k (t1 - t0) that fall inside (t0, t2]."""
        span = self.t1 - self.t0
        out = []
        k = 0
        while True:
            t = self.t0 + (span << k)
            if t > self.t2:
                return out
            out.append(t)
            k += 1

    def effective_nu(self) -> float:
        if self.nu is not None:
            return float(self.nu)
        try:
            return effective_sample_size(self.smoother)
        except UnsupportedKindError as exc:
            raise ValueError(
                "holt_winters has no closed-form effective sample size; "
                "pass nu explicitly in EngineConfig") from exc


@dataclass(frozen=True)
class StepOutput:
    t: int
    level: float
    sigma_star: float
    halfwidth: float | None
    recalibrated: bool
    q_current: float | None


@dataclass
class BandTrace:
    """Vectorized per-step outputs of a run; halfwidth/q are NaN when absent."""

    t: np.ndarray
    level: np.ndarray
    sigma_star: np.ndarray
    halfwidth: np.ndarray
    q: np.ndarray
    recalibrated: np.ndarray

    def __len__(self):
        return len(self.t)

    @property
    def lo(self) -> np.ndarray:
        return self.level - self.halfwidth

    @property
    def hi(self) -> np.ndarray:
        return self.level + self.halfwidth

    def outputs(self) -> list[StepOutput]:
        out = []
        for i in range(len(self.t)):
            hw = self.halfwidth[i]
            q = self.q[i]
            out.append(StepOutput(
                t=int(self.t[i]),
                level=float(self.level[i]),
                sigma_star=float(self.sigma_star[i]),
                halfwidth=None if math.isnan(hw) else float(hw),
                recalibrated=bool(self.recalibrated[i]),
                q_current=None if math.isnan(q) else float(q),
            ))
        return out


@dataclass(frozen=True)
class Decision:
    exceeded: bool
    first_exceed_time: int | None


class Engine:
    """Single-owner streaming state; see the module docstring for semantics."""

    def __init__(self, cfg: EngineConfig, warmup=(), backend: str = "auto",
                 chunk_size: int = 1024):
        warmup = np.asarray(warmup, dtype=float)
        if warmup.ndim != 1 or len(warmup) != cfg.t0:
            raise ValueError(f"warmup must supply exactly t0={cfg.t0} observations, "
                             f"got {len(np.atleast_1d(warmup))}")
        if len(warmup) and not np.isfinite(warmup).all():
            raise ValueError("warmup contains non-finite values")
        self.cfg = cfg
        self._kernel = get_backend(backend)
        self.nu = cfg.effective_nu()
        self.rho = persistence(self.nu, cfg.chi)
        self.dof = None if cfg.transform == "identity" else 2.0 + self.nu ** (1.0 / 3.0)
        self._table = get_transform_table(
            self.dof, scale="unit" if cfg.transform == "unit_student" else "standard")

        params = cfg.smoother
        self._kind = _KIND_IDS[params.kind]
        if params.kind == HOLT_WINTERS:
            self._etas = np.array(params.eta, dtype=float)
            self._period = params.period
            nregs = 2
        else:
            self._etas = np.array([params.eta, 0.0, 0.0])
            self._period = 0
            nregs = 1 if params.kind == "ewma" else 2

        big = cfg.b_total
        self._z = np.zeros(big)
        self._rs = np.zeros((big, nregs))
        self._rc = np.zeros((big, max(self._period, 1))) if self._period else np.zeros((big, 0))
        self._maxima = np.zeros(cfg.b2)

        main = Smoother(params)
        for x in warmup:
            main.update(float(x))
        self._ms = np.zeros(nregs)
        self._mc = np.zeros(self._period) if self._period else np.zeros(0)
        self._load_main(main)

        self.t = cfg.t0
        self.q = None
        self.calibrations = 0
        self._boundaries = cfg.boundaries
        self._next_boundary_idx = 0

        self._chunk = int(chunk_size)
        self._gens = replicate_streams(cfg.seed, big)
        self._buf = np.empty((big, self._chunk))
        self._fill_states: list[dict] = [None] * big
        self._offset = self._chunk  # forces a fill on first use

    # -- main smoother plumbing ------------------------------------------

    def _load_main(self, sm: Smoother) -> None:
        state = sm.state_dict()
        if self._kind == KIND_EWMA:
            self._ms[0] = state["s"]
        elif self._kind == KIND_BROWN:
            self._ms[0] = state["s"]
            self._ms[1] = state["s2"]
        else:
            self._ms[0] = state["s"]
            self._ms[1] = state["b"]
            self._mc[:] = state["seasonal"]

    @property
    def level(self) -> float:
        if self._kind == KIND_BROWN:
            return 2.0 * self._ms[0] - self._ms[1]
        return float(self._ms[0])

    def replicate_errors(self) -> np.ndarray:
        """Current bootstrap error of every replicate (diagnostic, O(B))."""
        if self._kind == KIND_BROWN:
            return 2.0 * self._rs[:, 0] - self._rs[:, 1]
        return self._rs[:, 0].copy()

    @property
    def backend(self) -> str:
        return self._kernel.BACKEND_NAME

    def state_nbytes(self) -> int:
        """Total size of the streaming state buffers; constant over the run."""
        arrays = (self._z, self._rs, self._rc, self._maxima, self._ms,
                  self._mc, self._buf)
        return sum(a.nbytes for a in arrays)

    # -- rng buffering ----------------------------------------------------

    def _refill(self) -> None:
        for b, gen in enumerate(self._gens):
            self._fill_states[b] = gen.bit_generator.state
            self._buf[b] = gen.standard_normal(self._chunk)
        self._offset = 0

    # -- calibration ------------------------------------------------------

    def _recalibrate(self) -> None:
        level = 1.0 - self.cfg.alpha / self.cfg.n_blocks
        rank = math.ceil(self.cfg.b2 * level - 1e-9)
        rank = min(max(rank, 1), self.cfg.b2)
        self.q = float(np.sort(self._maxima)[rank - 1])
        self.calibrations += 1
        self._next_boundary_idx += 1

    # -- stepping ---------------------------------------------------------

    def step(self, x: float) -> StepOutput:
        return self.run([x]).outputs()[0]

    def run(self, xs) -> BandTrace:
        """Advance through a batch of observations; O(B) memory throughout."""
        xs = np.ascontiguousarray(xs, dtype=float)
        n = len(xs)
        if self.t + n > self.cfg.t2:
            raise SequenceExhaustedError(
                f"engine is configured through t2={self.cfg.t2}; "
                f"cannot advance from t={self.t} by {n} steps")
        if n and not np.isfinite(xs).all():
            bad = int(np.flatnonzero(~np.isfinite(xs))[0])
            raise ValueError(f"observation at t={self.t + bad + 1} is not finite")

        out_level = np.empty(n)
        out_sigma = np.empty(n)
        q_track = np.full(n, np.nan)
        recal = np.zeros(n, dtype=bool)

        pos = 0
        while pos < n:
            if self._offset == self._chunk:
                self._refill()
            seg = min(n - pos, self._chunk - self._offset)
            if self._next_boundary_idx < len(self._boundaries):
                seg = min(seg, self._boundaries[self._next_boundary_idx] - self.t)
            self._kernel.run_segment(
                self._kind, self._etas, self._period, self.rho, self.cfg.b1,
                self.t + 1, xs[pos:pos + seg],
                self._buf[:, self._offset:self._offset + seg], self._table,
                self._z, self._rs, self._rc, self._ms, self._mc, self._maxima,
                out_level[pos:pos + seg], out_sigma[pos:pos + seg])
            if self.q is not None:
                q_track[pos:pos + seg] = self.q
            self._offset += seg
            self.t += seg
            pos += seg
            if (self._next_boundary_idx < len(self._boundaries)
                    and self.t == self._boundaries[self._next_boundary_idx]):
                self._recalibrate()
                q_track[pos - 1] = self.q
                recal[pos - 1] = True

        t_arr = np.arange(self.t - n + 1, self.t + 1)
        halfwidth = np.where(
            (t_arr > self.cfg.t1) & np.isfinite(q_track),
            q_track * out_sigma, np.nan)
        return BandTrace(t=t_arr, level=out_level, sigma_star=out_sigma,
                         halfwidth=halfwidth, q=q_track, recalibrated=recal)

    # -- snapshot / restore -------------------------------------------------

    def snapshot(self) -> dict:
        """Self-describing state record; restores to a bit-identical engine."""
        cfg = self.cfg
        return {
            "format": SNAPSHOT_FORMAT,
            "version": SNAPSHOT_VERSION,
            "config": {
                "smoother": {"kind": cfg.smoother.kind, "eta": cfg.smoother.eta,
                             "period": cfg.smoother.period},
                "alpha": cfg.alpha, "t0": cfg.t0, "t1": cfg.t1, "t2": cfg.t2,
                "b1": cfg.b1, "b2": cfg.b2, "chi": cfg.chi, "seed": cfg.seed,
                "nu": cfg.nu, "transform": cfg.transform,
            },
            "t": self.t,
            "q": self.q,
            "calibrations": self.calibrations,
            "z": self._z.tolist(),
            "rs": self._rs.tolist(),
            "rc": self._rc.tolist(),
            "ms": self._ms.tolist(),
            "mc": self._mc.tolist(),
            "maxima": self._maxima.tolist(),
            "rng": {
                "chunk": self._chunk,
                "offset": self._offset,
                "fill_states": self._fill_states,
            },
        }

    def snapshot_json(self) -> str:
        return json.dumps(self.snapshot())

    @classmethod
    def from_snapshot(cls, record: dict | str, backend: str = "auto") -> "Engine":
        if isinstance(record, str):
            record = json.loads(record)
        if record.get("format") != SNAPSHOT_FORMAT:
            raise ValueError("not a trendband engine snapshot")
        if record.get("version") != SNAPSHOT_VERSION:
            raise ValueError(f"unsupported snapshot version {record.get('version')}")
        sm = record["config"]["smoother"]
        eta = sm["eta"]
        params = SmootherParams(sm["kind"],
                                tuple(eta) if isinstance(eta, list) else eta,
                                sm["period"])
        ckw = {k: v for k, v in record["config"].items() if k != "smoother"}
        if isinstance(ckw.get("seed"), list):  # tuple seeds round-trip as lists
            ckw["seed"] = tuple(ckw["seed"])
        cfg = EngineConfig(smoother=params, **ckw)
        rng = record["rng"]
        # rebuild in place rather than via __init__, which expects warmup data
        eng = cls.__new__(cls)
        eng.cfg = cfg
        eng._kernel = get_backend(backend)
        eng.nu = cfg.effective_nu()
        eng.rho = persistence(eng.nu, cfg.chi)
        eng.dof = None if cfg.transform == "identity" else 2.0 + eng.nu ** (1.0 / 3.0)
        eng._table = get_transform_table(
            eng.dof, scale="unit" if cfg.transform == "unit_student" else "standard")
        eng._kind = _KIND_IDS[params.kind]
        if params.kind == HOLT_WINTERS:
            eng._etas = np.array(params.eta, dtype=float)
            eng._period = params.period
        else:
            eng._etas = np.array([params.eta, 0.0, 0.0])
            eng._period = 0
        eng._z = np.array(record["z"], dtype=float)
        eng._rs = np.array(record["rs"], dtype=float).reshape(len(eng._z), -1)
        rc = np.array(record["rc"], dtype=float)
        eng._rc = rc.reshape(len(eng._z), -1) if rc.size else np.zeros((len(eng._z), 0))
        eng._ms = np.array(record["ms"], dtype=float)
        eng._mc = np.array(record["mc"], dtype=float)
        eng._maxima = np.array(record["maxima"], dtype=float)
        eng.t = int(record["t"])
        eng.q = record["q"]
        eng.calibrations = int(record["calibrations"])
        eng._boundaries = cfg.boundaries
        eng._next_boundary_idx = sum(1 for b in eng._boundaries if b <= eng.t)
        eng._chunk = int(rng["chunk"])
        eng._gens = replicate_streams(cfg.seed, cfg.b_total)
        eng._buf = np.empty((cfg.b_total, eng._chunk))
        eng._fill_states = list(rng["fill_states"])
        eng._offset = int(rng["offset"])
        if eng._fill_states[0] is not None:
            for b, gen in enumerate(eng._gens):
                gen.bit_generator.state = eng._fill_states[b]
                eng._buf[b] = gen.standard_normal(eng._chunk)
        return eng


def bootstrap_delta_direct(params: SmootherParams, v, x, lagged_levels,
                           t: int) -> float:
    """Direct weighted-sum form of one replicate's bootstrap error at time t.

    Computes sum_i w_t(i) * v_i * (x_i - lagged_levels_i) over i = 1..t with
    the closed-form weights; series are aligned so index 1 is the first
    post-burn-in observation. This is the oracle the online recursion must
    reproduce.
    """
    v = np.asarray(v, dtype=float)
    x = np.asarray(x, dtype=float)
    lag = np.asarray(lagged_levels, dtype=float)
    if t < 1 or t > min(len(v), len(x), len(lag)):
        raise ValueError(f"t={t} out of range for the supplied series")
    w = weights(params, t)  # raises UnsupportedKindError for holt_winters
    return float(w @ (v[:t] * (x[:t] - lag[:t])))


def run_test(engine: Engine, xs, null_center=0.0,
             one_sided: bool = False) -> Decision:
    """Sequential test of level == null_center over the calibrated horizon.

    Rejects at the first t with |level_t - center_t| > halfwidth_t (the
    one-sided variant drops the absolute value). Only steps with a calibrated
    band (t > t1) participate.
    """
    trace = engine.run(xs)
    have_band = np.isfinite(trace.halfwidth)
    if not have_band.any():
        raise NotCalibratedError(
            f"horizon ends at t={engine.t} <= t1={engine.cfg.t1}; no calibrated steps")
    center = np.broadcast_to(np.asarray(null_center, dtype=float), trace.level.shape)
    dev = trace.level - center
    stat = dev if one_sided else np.abs(dev)
    exceed = have_band & (stat > trace.halfwidth)
    if not exceed.any():
        return Decision(False, None)
    return Decision(True, int(trace.t[np.flatnonzero(exceed)[0]]))
