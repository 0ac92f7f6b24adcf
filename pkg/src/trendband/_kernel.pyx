# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled per-observation bootstrap loop; mirrors _pykernel exactly."""

import numpy as np

from libc.math cimport fabs, floor, sqrt

BACKEND_NAME = "cython"

cdef int KIND_EWMA = 0
cdef int KIND_BROWN = 1
cdef int KIND_HW = 2


cdef inline double _hermite(double zv, double z_max, double h, int npts,
                            const double[::1] vals, const double[::1] ders):
    cdef double u = (zv + z_max) / h
    cdef Py_ssize_t k = <Py_ssize_t>floor(u)
    cdef double s = u - k
    cdef double s2 = s * s
    cdef double s3 = s2 * s
    cdef double h00 = 2.0 * s3 - 3.0 * s2 + 1.0
    cdef double h10 = s3 - 2.0 * s2 + s
    cdef double h01 = -2.0 * s3 + 3.0 * s2
    cdef double h11 = s3 - s2
    return (h00 * vals[k] + h01 * vals[k + 1]
            + h * (h10 * ders[k] + h11 * ders[k + 1]))


def run_segment(int kind, double[::1] etas, int period, double rho, int b1,
                long t_start, double[::1] xs, double[:, :] xi, object table,
                double[::1] z, double[:, ::1] rs, double[:, ::1] rc,
                double[::1] ms, double[::1] mc, double[::1] maxima,
                double[::1] out_level, double[::1] out_sigma):
    cdef Py_ssize_t m = xs.shape[0]
    cdef Py_ssize_t big = z.shape[0]
    cdef Py_ssize_t b2 = maxima.shape[0]
    cdef double sq = sqrt(max(1.0 - rho * rho, 0.0))
    cdef double e1 = etas[0]
    cdef double e2 = etas[1]
    cdef double e3 = etas[2]

    cdef bint identity = table.is_identity
    cdef double z_max = 0.0, h = 1.0
    cdef int npts = 0
    cdef double[::1] tvals = None
    cdef double[::1] tders = None
    if not identity:
        z_max = table.z_max
        h = table._h
        npts = table.points
        tvals = table._values
        tders = table._slopes

    cdef double[::1] delta = np.empty(big)
    cdef Py_ssize_t j, b, idx
    cdef double x, resid, zb, v, xstar, s_prev, s_new, c_lag
    cdef double mean, var, sigma, stat, lvl

    for j in range(m):
        x = xs[j]
        if kind == KIND_BROWN:
            resid = x - (2.0 * ms[0] - ms[1])
        else:
            resid = x - ms[0]

        if kind == KIND_HW:
            idx = (t_start + j - 1) % period
        else:
            idx = 0

        for b in range(big):
            zb = rho * z[b] + sq * xi[b, j]
            z[b] = zb
            if identity:
                v = zb
            elif fabs(zb) < z_max:
                v = _hermite(zb, z_max, h, npts, tvals, tders)
            else:
                v = <double>table(zb)  # rare far-tail draw: exact map
            xstar = v * resid
            if kind == KIND_EWMA:
                rs[b, 0] = e1 * xstar + (1.0 - e1) * rs[b, 0]
                delta[b] = rs[b, 0]
            elif kind == KIND_BROWN:
                rs[b, 0] = e1 * xstar + (1.0 - e1) * rs[b, 0]
                rs[b, 1] = e1 * rs[b, 0] + (1.0 - e1) * rs[b, 1]
                delta[b] = 2.0 * rs[b, 0] - rs[b, 1]
            else:
                c_lag = rc[b, idx]
                s_prev = rs[b, 0]
                s_new = e1 * (xstar - c_lag) + (1.0 - e1) * (s_prev + rs[b, 1])
                rs[b, 1] = e2 * (s_new - s_prev) + (1.0 - e2) * rs[b, 1]
                rc[b, idx] = e3 * (xstar - s_new) + (1.0 - e3) * c_lag
                rs[b, 0] = s_new
                delta[b] = s_new

        mean = 0.0
        for b in range(b1):
            mean += delta[b]
        mean /= b1
        var = 0.0
        for b in range(b1):
            var += (delta[b] - mean) * (delta[b] - mean)
        var /= b1 - 1
        sigma = sqrt(var) if var > 0.0 else 0.0

        if sigma > 0.0:
            for b in range(b1, big):
                stat = fabs(delta[b]) / sigma
                if stat > maxima[b - b1]:
                    maxima[b - b1] = stat

        if kind == KIND_EWMA:
            ms[0] = e1 * x + (1.0 - e1) * ms[0]
            lvl = ms[0]
        elif kind == KIND_BROWN:
            ms[0] = e1 * x + (1.0 - e1) * ms[0]
            ms[1] = e1 * ms[0] + (1.0 - e1) * ms[1]
            lvl = 2.0 * ms[0] - ms[1]
        else:
            c_lag = mc[idx]
            s_prev = ms[0]
            ms[0] = e1 * (x - c_lag) + (1.0 - e1) * (s_prev + ms[1])
            ms[1] = e2 * (ms[0] - s_prev) + (1.0 - e2) * ms[1]
            mc[idx] = e3 * (x - ms[0]) + (1.0 - e3) * c_lag
            lvl = ms[0]

        out_level[j] = lvl
        out_sigma[j] = sigma
