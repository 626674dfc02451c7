"""Pure-Python implementation of the hot numerical kernels.

This module mirrors ``_kernels.pyx`` function for function. It is used when
the compiled extension is unavailable or when ``HYBRID_UNITING_BACKEND=python``
is set, and it is the reference the compiled kernels are tested against.
"""

import math

import numpy as np

NAME = "python"


def rk4_step(f, x, h):
    """One classical RK4 step of size ``h`` for ``x' = f(x)``."""
    k1 = f(x)
    k2 = f(x + (0.5 * h) * k1)
    k3 = f(x + (0.5 * h) * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def all_finite(x):
    return bool(np.isfinite(x).all())


def barrier(z):
    # B(z) = max{0, (z-1)^2 ln(1/z)}; +inf on z <= 0
    if z <= 0.0:
        return math.inf
    if z >= 1.0:
        return 0.0
    return (z - 1.0) * (z - 1.0) * math.log(1.0 / z)


def barrier_deriv(z):
    if z <= 0.0:
        return -math.inf
    if z >= 1.0:
        return 0.0
    return 2.0 * (z - 1.0) * math.log(1.0 / z) - (z - 1.0) * (z - 1.0) / z


def obstacle_distance(x1, x2, mode, xo1, xo2, xb1, xb2, ahat, psi0, theta, rho, cut, soft):
    """Clearance of ``x`` from the obstacle for one routing mode.

    The angular part measures how far ``x`` has turned around the obstacle
    center ``xb``, starting from the shadow axis (the ray from ``xb`` pointing
    away from the target ``xo``). Mode 1 turns counterclockwise from that ray,
    mode 2 clockwise; ``psi0`` is the angular margin already granted on the
    axis, ``theta`` the angle over which the clearance grows from 0 to 1, and
    ``cut`` the angle past the target direction where the angle wraps. The
    radial part ``(|x - xb| - ahat) / rho`` keeps the obstacle disk itself
    out. The two are joined with a log-sum-exp smooth minimum of softness
    ``soft``. Returns ``(d, dd/dx1, dd/dx2)``.
    """
    ux = xb1 - xo1
    uy = xb2 - xo2
    un = math.hypot(ux, uy)
    ux /= un
    uy /= un
    w1 = x1 - xb1
    w2 = x2 - xb2
    r2 = w1 * w1 + w2 * w2
    if r2 == 0.0:
        return -ahat / rho, 0.0, 0.0
    r = math.sqrt(r2)
    sg = 1.0 if mode == 1 else -1.0
    psi = sg * math.atan2(ux * w2 - uy * w1, ux * w1 + uy * w2)
    if psi < cut - math.pi:
        psi += 2.0 * math.pi
    a = (psi + psi0) / theta
    ga1 = -sg * w2 / (r2 * theta)
    ga2 = sg * w1 / (r2 * theta)
    rc = (r - ahat) / rho
    gr1 = w1 / (r * rho)
    gr2 = w2 / (r * rho)
    m = a if a < rc else rc
    ea = math.exp(-(a - m) / soft)
    er = math.exp(-(rc - m) / soft)
    tot = ea + er
    d = m - soft * math.log(tot)
    return d, (ea * ga1 + er * gr1) / tot, (ea * ga2 + er * gr2) / tot


def potential(x1, x2, mode, xo1, xo2, xb1, xb2, ahat, psi0, theta, rho, cut, soft):
    """Potential ``1/2 |x - xo|^2 + B(d)`` and its gradient.

    Returns ``(phi, g1, g2, d)``; ``phi`` is +inf and the gradient zero where
    the clearance ``d`` is nonpositive.
    """
    d, gd1, gd2 = obstacle_distance(x1, x2, mode, xo1, xo2, xb1, xb2, ahat, psi0, theta, rho, cut, soft)
    if d <= 0.0:
        return math.inf, 0.0, 0.0, d
    e1 = x1 - xo1
    e2 = x2 - xo2
    db = barrier_deriv(d)
    return 0.5 * (e1 * e1 + e2 * e2) + barrier(d), e1 + db * gd1, e2 + db * gd2, d
