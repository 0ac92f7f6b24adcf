"""AR(1) simulator with trend, seasonality and compound shocks.

The instantaneous mean is m_i = mu + a*i + A*sin(2*pi*i/P + psi) + L_i where
L_i accumulates Bernoulli(p)-triggered Gaussian jumps. Observations follow
x_i = m_i + phi*(x_{i-1} - m_{i-1}) + eps_i with eps_i = sigma*z_i and z_i
either standard normal or a variance-standardized Student-t (the heavy-tail
ablation). The initial deviation x_0 - m_0 is zero.

Draws happen in a fixed order (shock indicators, jump sizes, innovation
uniforms) regardless of which components are switched on, and innovations are
generated by inverse CDF from the uniforms. Runs with the same seed therefore
share their randomness across parameter variations, including across the
gaussian / heavy-tail innovation choice (common random numbers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .multipliers import get_transform_table
from .numerics import std_normal_quantile
from .smoothers import Smoother, SmootherParams

_normal_quantile_vec = np.vectorize(std_normal_quantile, otypes=[float])

GAUSSIAN = "gaussian"
STUDENT_T = "t"


@dataclass(frozen=True)
class DgpParams:
    mu: float = 0.0
    slope: float = 0.0
    amplitude: float = 0.0
    period: float = 400.0
    phase: float = 0.0
    shock_prob: float = 0.0
    shock_scale: float = 0.0
    ar: float = 0.0
    sigma: float = 1.0
    innovation: str = GAUSSIAN
    innovation_df: float = 6.0

    def __post_init__(self):
        if abs(self.ar) >= 1.0:
            raise ValueError(f"AR coefficient must satisfy |phi| < 1, got {self.ar}")
        if self.period <= 0.0:
            raise ValueError(f"seasonal period must be positive, got {self.period}")
        if not (0.0 <= self.phase < 2.0 * math.pi):
            raise ValueError(f"phase must lie in [0, 2*pi), got {self.phase}")
        if not (0.0 <= self.shock_prob <= 1.0):
            raise ValueError(f"shock probability must lie in [0, 1], got {self.shock_prob}")
        if self.shock_scale < 0.0 or self.amplitude < 0.0 or self.sigma < 0.0:
            raise ValueError("scales must be nonnegative")
        if self.innovation not in (GAUSSIAN, STUDENT_T):
            raise ValueError(f"innovation must be '{GAUSSIAN}' or '{STUDENT_T}'")
        if self.innovation == STUDENT_T and self.innovation_df <= 2.0:
            raise ValueError("standardized t innovations need df > 2")


@dataclass(frozen=True)
class SimOutput:
    x: np.ndarray
    m: np.ndarray


# regimes used throughout the experiments; ar is filled in by preset()
_PRESETS = {
    "stationary": DgpParams(),
    "trend_seasonal": DgpParams(slope=1e-3, amplitude=0.4, period=400.0, phase=0.0),
    "trend_shocks": DgpParams(slope=1e-3, shock_prob=0.005, shock_scale=2.0),
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name: str, ar: float = 0.3, **overrides) -> DgpParams:
    """Named regime with the experiment defaults; ar in {0.3, 0.6} typically."""
    try:
        base = _PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}") from None
    return replace(base, ar=ar, **overrides)


def simulate(params: DgpParams, n: int, seed) -> SimOutput:
    """Generate n observations plus their true instantaneous means."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    rng = np.random.default_rng(seed)

    hit = rng.random(n) < params.shock_prob
    jumps = rng.standard_normal(n) * params.shock_scale
    u = np.clip(rng.random(n), 2.0**-53, 1.0 - 2.0**-53)
    z = _normal_quantile_vec(u)
    if params.innovation == STUDENT_T:
        # same latent normals pushed through the variance-one t quantile map
        z = get_transform_table(params.innovation_df)(z)

    i = np.arange(1, n + 1, dtype=float)
    level_shocks = np.cumsum(hit * jumps)
    m = (params.mu + params.slope * i
         + params.amplitude * np.sin(2.0 * math.pi * i / params.period + params.phase)
         + level_shocks)

    eps = params.sigma * z
    dev = np.empty(n)
    phi = params.ar
    acc = 0.0
    for k in range(n):
        acc = phi * acc + eps[k]
        dev[k] = acc
    return SimOutput(x=m + dev, m=m)


def true_smoothed_mean(params: SmootherParams, m) -> np.ndarray:
    """Smoothed-mean target: the smoother recursion applied to the true means."""
    return Smoother(params).run(np.asarray(m, dtype=float))


def write_series(path, x, m=None) -> None:
    """Write a simulated series as CSV (t, x[, m]) or, for .txt, one x per line."""
    x = np.asarray(x, dtype=float)
    with open(path, "w") as fh:
        if str(path).endswith(".txt"):
            for v in x:
                fh.write(f"{float(v)!r}\n")
            return
        fh.write("t,x,m\n" if m is not None else "t,x\n")
        for t in range(len(x)):
            if m is not None:
                fh.write(f"{t + 1},{float(x[t])!r},{float(m[t])!r}\n")
            else:
                fh.write(f"{t + 1},{float(x[t])!r}\n")


def read_series(path_or_lines) -> np.ndarray:
    """Read observations from plain lines of numbers or CSV rows (t, x[, m]).

    A CSV header row is skipped; the x column is the second field when the
    row has several fields, else the only one.
    """
    if hasattr(path_or_lines, "read"):
        lines = path_or_lines.read().splitlines()
    elif isinstance(path_or_lines, (list, tuple)):
        lines = list(path_or_lines)
    else:
        with open(path_or_lines) as fh:
            lines = fh.read().splitlines()
    out = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split(",") if "," in line else [line]
        try:
            out.append(float(fields[1] if len(fields) > 1 else fields[0]))
        except ValueError:
            if lineno == 1:  # header row
                continue
            raise ValueError(f"line {lineno}: cannot parse observation from {raw!r}")
    if not out:
        raise ValueError("no observations found in input")
    return np.array(out)
