"""Reference methods the bootstrap engine is compared against.

Two baselines: the iid multiplier bootstrap, which is the engine itself with
chi = 0 (persistence zero), and a Gaussian-mixture confidence sequence driven
by one-step innovations around the smoothed level. Both assume independent
streams, so neither is expected to hold its level under serial dependence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .engine import EngineConfig
from .smoothers import Smoother, SmootherParams


def iid_engine_config(base: EngineConfig) -> EngineConfig:
    """Same engine, persistence switched off: the iid multiplier bootstrap."""
    return replace(base, chi=0.0)


def asympcs_halfwidth(nu: float, sigma2: float, rho_mix: float,
                      alpha: float) -> float:
    """Gaussian-mixture boundary half-width at effective sample size nu."""
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if nu <= 0.0 or rho_mix <= 0.0:
        raise ValueError("nu and rho_mix must be positive")
    if sigma2 < 0.0:
        raise ValueError(f"sigma2 must be nonnegative, got {sigma2}")
    a = nu * sigma2 * rho_mix * rho_mix
    return math.sqrt(2.0 * (1.0 + a) / (nu * nu * rho_mix * rho_mix)
                     * math.log(math.sqrt(1.0 + a) / alpha))


@dataclass(frozen=True)
class AsympCsConfig:
    alpha: float
    nu: float
    rho_mix: float | None = None  # None -> 1/sqrt(nu)
    variance_eta: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.nu <= 0.0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if self.rho_mix is not None and self.rho_mix <= 0.0:
            raise ValueError(f"rho_mix must be positive, got {self.rho_mix}")

    @property
    def effective_rho_mix(self) -> float:
        return self.rho_mix if self.rho_mix is not None else 1.0 / math.sqrt(self.nu)


class AsympCs:
    """Streaming state of the confidence-sequence baseline.

    Tracks an exponentially weighted estimate of the innovation variance
    sigma_t^2 from y_t = x_t - level_{t-1} and emits the mixture half-width.
    """

    def __init__(self, cfg: AsympCsConfig):
        self.cfg = cfg
        self._var = Smoother(SmootherParams.ewma(cfg.variance_eta))

    @property
    def sigma2(self) -> float:
        return self._var.level

    def step(self, x: float, level_prev: float) -> float:
        y = x - level_prev
        sigma2 = self._var.update(y * y)
        return asympcs_halfwidth(self.cfg.nu, sigma2,
                                 self.cfg.effective_rho_mix, self.cfg.alpha)
