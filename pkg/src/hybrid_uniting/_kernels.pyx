# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. API-identical to ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, exp, atan2, isfinite, INFINITY, M_PI

cnp.import_array()

NAME = "cython"

def rk4_step(f, x, double h):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] k1, k2, k3, k4
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double hh = 0.5 * h, h6 = h / 6.0

    k1 = np.asarray(f(xv), dtype=np.float64)
    for i in range(n):
        s[i] = xv[i] + hh * k1[i]
    k2 = np.asarray(f(s), dtype=np.float64)
    s = np.empty(n)
    for i in range(n):
        s[i] = xv[i] + hh * k2[i]
    k3 = np.asarray(f(s), dtype=np.float64)
    s = np.empty(n)
    for i in range(n):
        s[i] = xv[i] + h * k3[i]
    k4 = np.asarray(f(s), dtype=np.float64)
    for i in range(n):
        out[i] = xv[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return out


def all_finite(x):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t i
    for i in range(xv.shape[0]):
        if not isfinite(xv[i]):
            return False
    return True


cdef inline double _barrier(double z) nogil:
    if z <= 0.0:
        return INFINITY
    if z >= 1.0:
        return 0.0
    return (z - 1.0) * (z - 1.0) * log(1.0 / z)


cdef inline double _barrier_deriv(double z) nogil:
    if z <= 0.0:
        return -INFINITY
    if z >= 1.0:
        return 0.0
    return 2.0 * (z - 1.0) * log(1.0 / z) - (z - 1.0) * (z - 1.0) / z


def barrier(double z):
    return _barrier(z)


def barrier_deriv(double z):
    return _barrier_deriv(z)


cdef inline void _distance(double x1, double x2, int mode, double xo1, double xo2,
                           double xb1, double xb2, double ahat, double psi0, double theta,
                           double rho, double cut, double soft,
                           double* d, double* g1, double* g2) nogil:
    cdef double ux = xb1 - xo1, uy = xb2 - xo2, un = sqrt(ux * ux + uy * uy)
    cdef double w1 = x1 - xb1, w2 = x2 - xb2, r2 = w1 * w1 + w2 * w2, r
    cdef double sg = 1.0 if mode == 1 else -1.0
    cdef double psi, a, ga1, ga2, rc, gr1, gr2, m, ea, er, tot
    if r2 == 0.0:
        d[0] = -ahat / rho
        g1[0] = 0.0
        g2[0] = 0.0
        return
    ux /= un
    uy /= un
    r = sqrt(r2)
    psi = sg * atan2(ux * w2 - uy * w1, ux * w1 + uy * w2)
    if psi < cut - M_PI:
        psi += 2.0 * M_PI
    a = (psi + psi0) / theta
    ga1 = -sg * w2 / (r2 * theta)
    ga2 = sg * w1 / (r2 * theta)
    rc = (r - ahat) / rho
    gr1 = w1 / (r * rho)
    gr2 = w2 / (r * rho)
    m = a if a < rc else rc
    ea = exp(-(a - m) / soft)
    er = exp(-(rc - m) / soft)
    tot = ea + er
    d[0] = m - soft * log(tot)
    g1[0] = (ea * ga1 + er * gr1) / tot
    g2[0] = (ea * ga2 + er * gr2) / tot


def obstacle_distance(double x1, double x2, int mode, double xo1, double xo2,
                      double xb1, double xb2, double ahat, double psi0, double theta,
                      double rho, double cut, double soft):
    cdef double d, g1, g2
    _distance(x1, x2, mode, xo1, xo2, xb1, xb2, ahat, psi0, theta, rho, cut, soft, &d, &g1, &g2)
    return d, g1, g2


def potential(double x1, double x2, int mode, double xo1, double xo2,
              double xb1, double xb2, double ahat, double psi0, double theta,
              double rho, double cut, double soft):
    cdef double d, gd1, gd2, e1, e2, db
    _distance(x1, x2, mode, xo1, xo2, xb1, xb2, ahat, psi0, theta, rho, cut, soft, &d, &gd1, &gd2)
    if d <= 0.0:
        return INFINITY, 0.0, 0.0, d
    e1 = x1 - xo1
    e2 = x2 - xo2
    db = _barrier_deriv(d)
    return 0.5 * (e1 * e1 + e2 * e2) + _barrier(d), e1 + db * gd1, e2 + db * gd2, d
