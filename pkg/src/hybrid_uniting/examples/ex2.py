"""Point mass steered around a disk obstacle to a target hidden behind it.

The global controller descends one of two potentials

    phi_i(xi) = 1/2 |xi - xi_circ|^2 + B(d_i(xi)),    B(z) = max{0, (z - 1)^2 ln(1/z)},

which vanish at an intermediate point ``xi_circ`` with line of sight to the
target. ``d_i`` is a clearance that routes mode 1 below the obstacle and
mode 2 above it; the controller switches between the two potentials with
hysteresis. Once near ``xi_circ`` the supervisor hands over to the local
controller ``u = -xi + xi_star``.

Clearance. ``d_i`` combines an angular coordinate (how far ``xi`` has turned
around the obstacle center, measured from the ray pointing away from
``xi_circ``, counterclockwise for mode 1 and clockwise for mode 2) with the
radial clearance ``(|xi - xi_bar| - alpha_hat) / rho`` through a smooth
minimum. Moving around the obstacle toward ``xi_circ`` increases the angular
part, which is what makes ``d/dt phi <= -2 phi`` hold along the gradient flow
from the default start. The inequality is not global: it fails in a small
pocket close to the obstacle (radius 0.14 to 0.17 from its center, where the
radial term fades out) that the routes never enter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .._backend import kernels
from ..composer import HybridController, Plant, pad_controller
from ..errors import DomainError, InvalidConfig
from ..observer import NormObserverSpec
from ..supervisor import SupervisedLoop, SupervisedState, SupervisorParams, assemble


@dataclass(frozen=True)
class Example2Config:
    xi_star: tuple = (4.0, -0.25)
    xi_circ: tuple = (3.0, 0.0)
    xi_bar: tuple = (1.0, 0.0)
    alpha_hat: float = 0.07
    mu: float = 1.1
    lam: float = 0.09
    eps_local: float = 1.0
    # clearance shape
    psi0: float = 0.05
    theta: float = 0.8
    rho: float = 0.1
    cut: float = math.pi / 2
    soft: float = 0.02
    # supervisor and initial condition
    eps0a: float = 0.01
    eps1a: float = 25.0
    tau_star: float = 5.0
    xi0: tuple = (0.0, 0.0)
    zeta1_0: int = 1
    q0: int = 1
    z0: float = 0.0
    z1: float = 0.0

    def __post_init__(self):
        if not self.mu > 1.0:
            raise InvalidConfig(f"mu must exceed 1, got {self.mu}", field="mu")
        if not (0.0 < self.lam < self.mu - 1.0):
            raise InvalidConfig(f"lam must lie in (0, mu - 1) = (0, {self.mu - 1.0:g}), got {self.lam}", field="lam")
        if not self.alpha_hat > 0.0:
            raise InvalidConfig(f"alpha_hat must be positive, got {self.alpha_hat}", field="alpha_hat")
        if not self.eps_local > 0.0:
            raise InvalidConfig(f"eps_local must be positive, got {self.eps_local}", field="eps_local")
        if self.zeta1_0 not in (1, 2):
            raise InvalidConfig(f"zeta1_0 must be 1 or 2, got {self.zeta1_0}", field="zeta1_0")
        if self.q0 not in (0, 1):
            raise InvalidConfig(f"q0 must be 0 or 1, got {self.q0}", field="q0")
        for name in ("psi0", "theta", "rho", "soft"):
            if not getattr(self, name) > 0.0:
                raise InvalidConfig(f"{name} must be positive", field=name)
        if float(np.hypot(self.xi_circ[0] - self.xi_bar[0], self.xi_circ[1] - self.xi_bar[1])) == 0.0:
            raise InvalidConfig("xi_circ must differ from the obstacle center", field="xi_circ")

    @property
    def gamma_prime(self) -> float:
        return 1.0 / (self.mu - self.lam)

    @property
    def eps1(self) -> float:
        return 1.0 - self.gamma_prime


def ex2_barrier(z: float) -> float:
    if z <= 0.0:
        raise DomainError(f"barrier is defined for z > 0, got {z}")
    return kernels.barrier(float(z))


def ex2_barrier_deriv(z: float) -> float:
    if z <= 0.0:
        raise DomainError(f"barrier is defined for z > 0, got {z}")
    return kernels.barrier_deriv(float(z))


def _shape(cfg: Example2Config):
    return (cfg.xi_circ[0], cfg.xi_circ[1], cfg.xi_bar[0], cfg.xi_bar[1],
            cfg.alpha_hat, cfg.psi0, cfg.theta, cfg.rho, cfg.cut, cfg.soft)


def ex2_clearance(xi, i: int, cfg: Example2Config):
    """``(d_i(xi), grad d_i(xi))``."""
    d, g1, g2 = kernels.obstacle_distance(float(xi[0]), float(xi[1]), int(i), *_shape(cfg))
    return d, np.array([g1, g2])


def _potential_raw(xi, i, cfg):
    return kernels.potential(float(xi[0]), float(xi[1]), int(i), *_shape(cfg))


def ex2_potential(xi, i: int, cfg: Example2Config):
    """``(phi_i(xi), grad phi_i(xi))``; raises DomainError where ``d_i <= 0``."""
    phi, g1, g2, d = _potential_raw(xi, i, cfg)
    if d <= 0.0:
        raise DomainError(f"clearance d_{i} = {d:.3g} <= 0 at {tuple(xi)}")
    return phi, np.array([g1, g2])


def ex2_output(xi, cfg: Example2Config) -> np.ndarray:
    """Measurement of the global controller: ``(phi1, grad phi1, phi2, grad phi2)``.

    ``phi_i`` is reported as +inf (with zero gradient) where ``d_i <= 0``.
    """
    p1, a1, b1, _ = _potential_raw(xi, 1, cfg)
    p2, a2, b2, _ = _potential_raw(xi, 2, cfg)
    return np.array([p1, a1, b1, p2, a2, b2])


def _mode_of(zeta) -> int:
    return 2 if zeta[0] >= 1.5 else 1


def _phis(y):
    return {1: y[0], 2: y[3]}


def ex2_hysteresis_jump(xi, zeta1: int, cfg: Example2Config) -> list:
    """Successor modes ``{k : phi_zeta1 >= (mu - lam) phi_k}``, preferred first.

    The preferred successor is the minimizer of ``phi``; on ties the current
    mode comes first.
    """
    return _successors(_phis(ex2_output(xi, cfg)), zeta1, cfg.mu - cfg.lam)


def _successors(phi, current, ratio):
    ok = [k for k in (1, 2) if phi[current] >= ratio * phi[k]]
    return sorted(ok, key=lambda k: (phi[k], k != current))


def wedge_region(xi, i: int) -> bool:
    """Membership of the wedge routing regions ``|xi1| - 1.1 >= xi2`` for
    mode 1 and ``|xi1| + 1.1 <= xi2`` for mode 2.

    These sets do not contain the start point of the mode-2 route and are not
    used by the controller; they are exposed for comparison only.
    """
    if i == 1:
        return abs(xi[0]) - 1.1 >= xi[1]
    return abs(xi[0]) + 1.1 <= xi[1]


def ex2_global_controller(cfg: Example2Config) -> HybridController:
    mu, ratio = cfg.mu, cfg.mu - cfg.lam
    xo = np.asarray(cfg.xi_circ, dtype=float)

    def kappa(y, zeta):
        k = _mode_of(zeta)
        g = y[1:3] if k == 1 else y[4:6]
        return -np.asarray(g, dtype=float)

    def flow_guard(y, zeta):
        phi = _phis(y)
        k = _mode_of(zeta)
        low = min(phi.values())
        if not math.isfinite(phi[k]):
            return -1.0
        return mu * low - phi[k]

    def jump_guard(y, zeta):
        phi = _phis(y)
        k = _mode_of(zeta)
        if not math.isfinite(phi[k]):
            return 1.0
        return phi[k] - ratio * min(phi.values())

    def g_c(y, zeta):
        return [np.array([float(k)]) for k in _successors(_phis(y), _mode_of(zeta), ratio)]

    return HybridController(
        n_c=1,
        kappa=kappa,
        target_distance=lambda xi: float(np.hypot(xi[0] - xo[0], xi[1] - xo[1])),
        f_c=lambda y, zeta: np.zeros(1),
        flow_guard=flow_guard,
        jump_guard=jump_guard,
        g_c=g_c,
        phi_reset=np.array([1.0]),
        phi_guard=lambda zeta: -min(abs(zeta[0] - 1.0), abs(zeta[0] - 2.0)),
        phi_distance=lambda zeta: min(abs(zeta[0] - 1.0), abs(zeta[0] - 2.0)),
        name="K1 (hysteresis gradient descent)",
    )


def ex2_local_controller(cfg: Example2Config) -> HybridController:
    xs = np.asarray(cfg.xi_star, dtype=float)
    return HybridController(
        n_c=0,
        kappa=lambda y, zeta: -np.asarray(y, dtype=float) + xs,
        target_distance=lambda xi: float(np.hypot(xi[0] - xs[0], xi[1] - xs[1])),
        name="K0 (local)",
    )


def ex2_plant(cfg: Example2Config) -> Plant:
    return Plant(
        n_p=2,
        f_p=lambda xi, u: np.asarray(u, dtype=float).copy(),
        outputs=(lambda xi: np.asarray(xi, dtype=float), lambda xi: ex2_output(xi, cfg)),
        m_p=2,
        name="point mass",
    )


def ex2_observers(cfg: Example2Config):
    xs = np.asarray(cfg.xi_star, dtype=float)

    def quad(s):
        return s * s

    def half(s):
        return 0.5 * s * s

    def active_norm(y, zeta):
        part = y[0:3] if _mode_of(zeta) == 1 else y[3:6]
        return float(np.linalg.norm(part))

    def V1(x):
        return _potential_raw(x[:2], _mode_of(x[-1:]), cfg)[0]

    obs0 = NormObserverSpec(eps=1.0, gamma=lambda s: 0.0, alpha2=half, alpha1=half,
                            alpha1_inv=lambda s: math.sqrt(2.0 * s),
                            V=lambda x: 0.5 * float((x[0] - xs[0]) ** 2 + (x[1] - xs[1]) ** 2), name="obs0")
    obs1 = NormObserverSpec(eps=cfg.eps1, gamma=quad, alpha2=quad, alpha1=half,
                            alpha1_inv=lambda s: math.sqrt(2.0 * s), V=V1, output_norm=active_norm, name="obs1")
    return obs0, obs1


def ex2_build(cfg: Example2Config = Example2Config(), name="ex2") -> SupervisedLoop:
    plant = ex2_plant(cfg)
    K1 = ex2_global_controller(cfg)
    K0 = pad_controller(ex2_local_controller(cfg), 1)
    obs0, obs1 = ex2_observers(cfg)
    params = SupervisorParams(cfg.eps0a, cfg.eps1a, cfg.tau_star)
    init = SupervisedState(np.array(cfg.xi0, dtype=float), np.zeros(1), np.array([float(cfg.zeta1_0)]),
                           cfg.z0, cfg.z1, cfg.q0, 0.0)
    return assemble(name, plant, K0, K1, obs0, obs1, params, init)
