"""Autoregressive Gaussian bootstrap multipliers with a heavy-tail map.

Each replicate carries a latent chain Z_t = rho Z_{t-1} + sqrt(1 - rho^2) xi_t
with standard normal innovations, so Z_t stays marginally N(0, 1). The
emitted multiplier is V_t = T(Z_t) where T maps through the normal CDF into a
unit-variance Student-t quantile; the persistence rho = 1 - nu^(-chi) is tied
to the effective sample size of the smoother being bootstrapped, and the
degrees of freedom 2 + nu^(1/3) shrink toward the normal as nu grows.

Bulk evaluation goes through a cubic-Hermite table on a symmetric grid with
the exact map used outside it; the table is cached per degrees of freedom.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import numerics as nm


def persistence(nu: float, chi: float) -> float:
    """Latent-chain persistence 1 - nu^(-chi).

    chi = 0 gives iid multipliers. Values of chi at or above 1/2 are outside
    the supported range of the construction and draw a warning.
    """
    if nu <= 0.0:
        raise ValueError(f"need nu > 0, got {nu}")
    if chi < 0.0:
        raise ValueError(f"need chi >= 0, got {chi}")
    if chi >= 0.5:
        warnings.warn(f"chi={chi} is outside [0, 1/2); proceeding anyway",
                      stacklevel=2)
    return 1.0 - nu ** (-chi)


def transform(z: float, dof: float) -> float:
    """Heavy-tail map T(z): normal CDF followed by unit-variance t quantile.

    Odd and strictly increasing; computed from the tail probability so it
    stays accurate arbitrarily far out.
    """
    if not math.isfinite(z):
        raise ValueError(f"transform requires finite z, got {z!r}")
    if z == 0.0:
        return 0.0
    tail = nm.std_normal_tail(abs(z))
    return math.copysign(nm.unit_variance_t_upper_quantile(tail, dof), z)


@dataclass(frozen=True)
class MultiplierConfig:
    """Multiplier parameters derived from the smoother's effective sample size."""

    nu: float
    chi: float = 1.0 / 3.0

    def __post_init__(self):
        if self.nu <= 0.0:
            raise ValueError(f"need nu > 0, got {self.nu}")

    @property
    def rho(self) -> float:
        return persistence(self.nu, self.chi)

    @property
    def dof(self) -> float:
        return 2.0 + self.nu ** (1.0 / 3.0)


@dataclass
class MultiplierState:
    z: float = 0.0


def multiplier_step(state: MultiplierState, cfg: MultiplierConfig,
                    xi: float) -> tuple[MultiplierState, float]:
    """Advance the latent chain by one innovation and emit the multiplier."""
    rho = cfg.rho
    z = rho * state.z + math.sqrt(1.0 - rho * rho) * xi
    return MultiplierState(z), transform(z, cfg.dof)


def _unit_variance_t_density_vec(u: np.ndarray, d: float) -> np.ndarray:
    c = math.exp(math.lgamma(0.5 * (d + 1.0)) - math.lgamma(0.5 * d)) / \
        math.sqrt((d - 2.0) * math.pi)
    return c * (1.0 + u * u / (d - 2.0)) ** (-0.5 * (d + 1.0))


class TransformTable:
    """Cubic Hermite interpolation of T on [-z_max, z_max].

    Node values come from the exact map and node slopes from the analytic
    derivative T'(z) = phi(z) / f_t(T(z)), so the interpolant is accurate to
    roughly 1e-10 over the grid; the rare |z| > z_max falls back to the exact
    map. dof None gives the identity (the no-transform ablation).

    scale "unit" emits the variance-one multiplier of the asymptotic theory;
    "standard" emits the plain t quantile, whose variance dof/(dof - 2)
    deliberately widens bands when the effective sample size is small.
    """

    def __init__(self, dof: float | None, z_max: float = 6.0, points: int = 8193,
                 scale: str = "unit"):
        if scale not in ("unit", "standard"):
            raise ValueError(f"scale must be 'unit' or 'standard', got {scale!r}")
        self.dof = dof
        self.scale = scale
        self.z_max = float(z_max)
        self.points = int(points)
        if dof is None:
            self._values = self._slopes = None
            self._h = 0.0
            self._factor = 1.0
            return
        if dof <= 2.0:
            raise ValueError(f"need dof > 2, got {dof}")
        self._factor = 1.0 if scale == "unit" else math.sqrt(dof / (dof - 2.0))
        zs = np.linspace(-self.z_max, self.z_max, self.points)
        self._h = zs[1] - zs[0]
        self._values = self._factor * np.array([transform(z, dof) for z in zs])
        pdf = np.exp(-0.5 * zs * zs) / math.sqrt(2.0 * math.pi)
        self._slopes = self._factor * pdf / _unit_variance_t_density_vec(
            self._values / self._factor, dof)

    @property
    def is_identity(self) -> bool:
        return self.dof is None

    def __call__(self, z):
        scalar = np.isscalar(z)
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if self.dof is None:
            out = z.copy()
            return float(out[0]) if scalar else out
        out = np.empty_like(z)
        u = (z + self.z_max) / self._h
        k = np.floor(u).astype(np.int64)
        inside = (k >= 0) & (k < self.points - 1)
        ki = np.clip(k, 0, self.points - 2)
        s = u - ki
        s2 = s * s
        s3 = s2 * s
        h00 = 2.0 * s3 - 3.0 * s2 + 1.0
        h10 = s3 - 2.0 * s2 + s
        h01 = -2.0 * s3 + 3.0 * s2
        h11 = s3 - s2
        y0 = self._values[ki]
        y1 = self._values[ki + 1]
        d0 = self._slopes[ki]
        d1 = self._slopes[ki + 1]
        out[:] = h00 * y0 + h01 * y1 + self._h * (h10 * d0 + h11 * d1)
        if not inside.all():
            for idx in np.nonzero(~inside)[0]:
                out[idx] = self._factor * transform(float(z[idx]), self.dof)
        return float(out[0]) if scalar else out


@functools.lru_cache(maxsize=64)
def get_transform_table(dof: float | None, z_max: float = 6.0,
                        points: int = 8193, scale: str = "unit") -> TransformTable:
    """Shared per-dof table; engine runs with equal nu reuse one instance."""
    return TransformTable(dof, z_max=z_max, points=points, scale=scale)
