"""Pure-numpy fallback for the per-observation bootstrap loop.

Semantics must match ``_kernel`` (the compiled version) exactly: one call
advances the engine through a run of steps that contains no recalibration
boundary. Replicates are vectorized across the first axis.
"""

from __future__ import annotations

import numpy as np

KIND_EWMA = 0
KIND_BROWN = 1
KIND_HW = 2

BACKEND_NAME = "python"


def main_level(kind: int, ms: np.ndarray) -> float:
    if kind == KIND_BROWN:
        return 2.0 * ms[0] - ms[1]
    return float(ms[0])


def run_segment(kind, etas, period, rho, b1, t_start, xs, xi, table,
                z, rs, rc, ms, mc, maxima, out_level, out_sigma):
    """Advance all replicates and the main smoother through len(xs) steps.

    t_start is the 1-based time of the first observation in xs. Arrays z,
    rs, rc, ms, mc, maxima are updated in place; per-step level and bootstrap
    scale go to out_level / out_sigma.
    """
    m = len(xs)
    big = z.shape[0]
    sq = np.sqrt(max(1.0 - rho * rho, 0.0))
    e1 = etas[0]
    for j in range(m):
        x = xs[j]
        resid = x - main_level(kind, ms)
        z *= rho
        z += sq * xi[:, j]
        v = table(z)
        xstar = v * resid
        if kind == KIND_EWMA:
            rs[:, 0] *= 1.0 - e1
            rs[:, 0] += e1 * xstar
            delta = rs[:, 0]
            ms[0] = e1 * x + (1.0 - e1) * ms[0]
        elif kind == KIND_BROWN:
            rs[:, 0] *= 1.0 - e1
            rs[:, 0] += e1 * xstar
            rs[:, 1] *= 1.0 - e1
            rs[:, 1] += e1 * rs[:, 0]
            delta = 2.0 * rs[:, 0] - rs[:, 1]
            ms[0] = e1 * x + (1.0 - e1) * ms[0]
            ms[1] = e1 * ms[0] + (1.0 - e1) * ms[1]
        else:
            e2, e3 = etas[1], etas[2]
            idx = (t_start + j - 1) % period
            c_lag = rc[:, idx].copy()
            s_prev = rs[:, 0].copy()
            s_new = e1 * (xstar - c_lag) + (1.0 - e1) * (s_prev + rs[:, 1])
            rs[:, 1] = e2 * (s_new - s_prev) + (1.0 - e2) * rs[:, 1]
            rc[:, idx] = e3 * (xstar - s_new) + (1.0 - e3) * c_lag
            rs[:, 0] = s_new
            delta = s_new
            mc_lag = mc[idx]
            ms_prev = ms[0]
            ms[0] = e1 * (x - mc_lag) + (1.0 - e1) * (ms_prev + ms[1])
            ms[1] = e2 * (ms[0] - ms_prev) + (1.0 - e2) * ms[1]
            mc[idx] = e3 * (x - ms[0]) + (1.0 - e3) * mc_lag
        head = delta[:b1]
        var = head.var(ddof=1)
        sigma = np.sqrt(var) if var > 0.0 else 0.0
        if sigma > 0.0 and b1 < big:
            np.maximum(maxima, np.abs(delta[b1:]) / sigma, out=maxima)
        out_level[j] = main_level(kind, ms)
        out_sigma[j] = sigma
