"""Linear recursive trend smoothers and their weight-space views.

Three kinds are supported:

* ``ewma``          -- s_t = eta*x_t + (1-eta)*s_{t-1}
* ``brown``         -- double exponential smoothing, level 2*s1 - s2
* ``holt_winters``  -- additive-seasonal triple smoothing with period L

All start from an all-zero state, so every level output is a linear function
of the inputs. For ewma and brown the closed-form weights w_t(i) are
available; holt_winters is recursion-only (its level is still linear in the
inputs, which is what downstream bootstrap logic relies on).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EWMA = "ewma"
BROWN = "brown"
HOLT_WINTERS = "holt_winters"

_KINDS = (EWMA, BROWN, HOLT_WINTERS)


class UnsupportedKindError(ValueError):
    """Raised for operations a smoother kind does not define."""


@dataclass(frozen=True)
class SmootherParams:
    kind: str
    eta: float | tuple[float, float, float]
    period: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown smoother kind {self.kind!r}")
        if self.kind == HOLT_WINTERS:
            etas = self.eta
            if not (isinstance(etas, tuple) and len(etas) == 3):
                raise ValueError("holt_winters takes a triple (eta1, eta2, eta3)")
            if not all(0.0 <= e <= 1.0 for e in etas):
                raise ValueError(f"holt_winters etas must lie in [0, 1], got {etas}")
            if self.period is None or self.period < 1:
                raise ValueError("holt_winters requires a seasonal period >= 1")
        else:
            if not isinstance(self.eta, float):
                object.__setattr__(self, "eta", float(self.eta))
            if not (0.0 < self.eta < 1.0):
                raise ValueError(f"{self.kind} requires 0 < eta < 1, got {self.eta}")
            if self.period is not None:
                raise ValueError(f"{self.kind} does not take a seasonal period")

    @classmethod
    def ewma(cls, eta: float) -> "SmootherParams":
        return cls(EWMA, float(eta))

    @classmethod
    def brown(cls, eta: float) -> "SmootherParams":
        return cls(BROWN, float(eta))

    @classmethod
    def holt_winters(cls, eta1: float, eta2: float, eta3: float,
                     period: int) -> "SmootherParams":
        return cls(HOLT_WINTERS, (float(eta1), float(eta2), float(eta3)), int(period))

    @classmethod
    def from_nu(cls, nu: float) -> "SmootherParams":
        """EWMA parameters with effective sample size nu = (2 - eta) / eta."""
        if nu <= 1.0:
            raise ValueError(f"effective sample size must exceed 1, got {nu}")
        return cls.ewma(2.0 / (nu + 1.0))


@dataclass
class Smoother:
    """Mutable smoother state; update() advances one step and returns the level."""

    params: SmootherParams
    t: int = 0
    _s: float = 0.0
    _s2: float = 0.0
    _b: float = 0.0
    _seasonal: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.params.kind == HOLT_WINTERS and self._seasonal is None:
            self._seasonal = np.zeros(self.params.period)

    @property
    def level(self) -> float:
        if self.params.kind == BROWN:
            return 2.0 * self._s - self._s2
        return self._s

    def update(self, x: float) -> float:
        if not np.isfinite(x):
            raise ValueError(f"observation at t={self.t + 1} is not finite: {x!r}")
        kind = self.params.kind
        if kind == EWMA:
            eta = self.params.eta
            self._s = eta * x + (1.0 - eta) * self._s
        elif kind == BROWN:
            eta = self.params.eta
            self._s = eta * x + (1.0 - eta) * self._s
            self._s2 = eta * self._s + (1.0 - eta) * self._s2
        else:
            eta1, eta2, eta3 = self.params.eta
            idx = self.t % self.params.period
            c_lag = self._seasonal[idx]
            s_prev = self._s
            self._s = eta1 * (x - c_lag) + (1.0 - eta1) * (s_prev + self._b)
            self._b = eta2 * (self._s - s_prev) + (1.0 - eta2) * self._b
            self._seasonal[idx] = eta3 * (x - self._s) + (1.0 - eta3) * c_lag
        self.t += 1
        return self.level

    def run(self, xs) -> np.ndarray:
        """Advance through a whole series, returning the level at each step."""
        out = np.empty(len(xs))
        for i, x in enumerate(xs):
            out[i] = self.update(float(x))
        return out

    def copy(self) -> "Smoother":
        seasonal = None if self._seasonal is None else self._seasonal.copy()
        return Smoother(self.params, self.t, self._s, self._s2, self._b, seasonal)

    def state_dict(self) -> dict:
        out = {"t": self.t, "s": self._s, "s2": self._s2, "b": self._b}
        if self._seasonal is not None:
            out["seasonal"] = self._seasonal.tolist()
        return out

    def load_state_dict(self, state: dict) -> None:
        self.t = int(state["t"])
        self._s = float(state["s"])
        self._s2 = float(state["s2"])
        self._b = float(state["b"])
        if self._seasonal is not None:
            self._seasonal[:] = state["seasonal"]


def weight(params: SmootherParams, t: int, i: int) -> float:
    """Closed-form weight w_{t}(i) of observation i in the level at time t."""
    if params.kind == HOLT_WINTERS:
        raise UnsupportedKindError("no closed-form weights for holt_winters")
    if not 1 <= i <= t:
        raise ValueError(f"need 1 <= i <= t, got i={i}, t={t}")
    eta = params.eta
    lag = t - i
    if params.kind == EWMA:
        return eta * (1.0 - eta) ** lag
    return eta * (2.0 - eta * (lag + 1)) * (1.0 - eta) ** lag


def weights(params: SmootherParams, t: int) -> np.ndarray:
    """Vector of w_{t}(i) for i = 1..t."""
    if params.kind == HOLT_WINTERS:
        raise UnsupportedKindError("no closed-form weights for holt_winters")
    if t < 1:
        raise ValueError(f"need t >= 1, got {t}")
    eta = params.eta
    lags = np.arange(t - 1, -1, -1, dtype=float)
    geo = (1.0 - eta) ** lags
    if params.kind == EWMA:
        return eta * geo
    return eta * (2.0 - eta * (lags + 1.0)) * geo


def effective_sample_size(params: SmootherParams) -> float:
    """Steady-state inverse sum of squared weights.

    EWMA has the closed form (2 - eta) / eta. For brown the sum is truncated
    once both the terms fall below 1e-12 and the zero crossing of the weight
    at lag ~ (2 - eta)/eta is safely past.
    """
    if params.kind == HOLT_WINTERS:
        raise UnsupportedKindError("no steady-state weight sum for holt_winters")
    eta = params.eta
    if params.kind == EWMA:
        return (2.0 - eta) / eta
    total = 0.0
    lag = 0
    min_lags = 4.0 / eta + 50.0
    while True:
        w = eta * (2.0 - eta * (lag + 1)) * (1.0 - eta) ** lag
        term = w * w
        total += term
        lag += 1
        if term < 1e-12 and lag > min_lags:
            break
    return 1.0 / total


def weight_distance(eta: float, s: float, t: float, gamma: float, c: int) -> float:
    """Weight-space pseudo-metric between two time fractions for EWMA.

    With nu = (2 - eta)/eta, the fractions s, t in [1/c, 1] map to times
    floor(s*c*nu) and floor(t*c*nu); the distance is the (scaled) l_gamma norm
    of the difference of the two weight vectors.
    """
    if not (0.0 < eta < 1.0):
        raise ValueError(f"need 0 < eta < 1, got {eta}")
    if gamma <= 2.0:
        raise ValueError(f"need gamma > 2, got {gamma}")
    if c < 1:
        raise ValueError(f"need c >= 1, got {c}")
    lo = 1.0 / c
    if not (lo <= s <= 1.0 and lo <= t <= 1.0):
        raise ValueError(f"s, t must lie in [1/{c}, 1], got s={s}, t={t}")
    nu = (2.0 - eta) / eta
    m_s = int(np.floor(s * c * nu))
    m_t = int(np.floor(t * c * nu))
    m_max = max(m_s, m_t)
    if m_max < 1:
        return 0.0
    idx = np.arange(1, m_max + 1)
    w_s = np.where(idx <= m_s, eta * (1.0 - eta) ** np.maximum(m_s - idx, 0), 0.0)
    w_t = np.where(idx <= m_t, eta * (1.0 - eta) ** np.maximum(m_t - idx, 0), 0.0)
    diff = np.abs(nu * w_s - nu * w_t) ** gamma
    return float((diff.sum() / nu) ** (1.0 / gamma))
