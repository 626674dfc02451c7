"""Nonlinear planar plant with a local and a global controller.

The plant

    xi1' = -xi1 + (u1 - xi2) xi1^2
    xi2' = -xi2 + xi1^2 + alpha_bar + u2

is stabilized at the origin by ``u = (0, -alpha_bar)`` measuring ``xi1`` only
(basin contains ``{V0 <= 1/6}``), and globally driven to ``(0, alpha_bar)`` by
``u = (xi2, 0)`` measuring ``xi2 - alpha_bar``. The supervisor hands control
to the local controller once the global one has provably entered the basin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..composer import HybridController, Plant, compose_closed_loop
from ..design import DesignInputs
from ..errors import InvalidConfig
from ..observer import NormObserverSpec
from ..supervisor import SupervisedLoop, SupervisedState, SupervisorParams, assemble

ALPHA_MAX = math.sqrt(3.0) / 3.0


@dataclass(frozen=True)
class Example1Config:
    alpha_bar: float = 0.25
    sup_params: SupervisorParams = field(default_factory=lambda: SupervisorParams(0.01, 0.01, 1.0))
    xi0: tuple = (3.0, -3.0)
    q0: int = 1
    z0: float = 0.0
    z1: float = 1.0
    tau0: float = 0.0

    def __post_init__(self):
        if not (0.0 < abs(self.alpha_bar) < ALPHA_MAX):
            raise InvalidConfig(f"|alpha_bar| must lie in (0, {ALPHA_MAX:.6f}), got {self.alpha_bar}",
                                field="alpha_bar")
        if len(self.xi0) != 2:
            raise InvalidConfig("xi0 must have two entries", field="xi0")
        if self.q0 not in (0, 1):
            raise InvalidConfig(f"q0 must be 0 or 1, got {self.q0}", field="q0")


def ex1_plant_dynamics(xi, u, alpha_bar):
    x1, x2 = xi[0], xi[1]
    return np.array([-x1 + (u[0] - x2) * x1 * x1, -x2 + x1 * x1 + alpha_bar + u[1]])


def ex1_plant(alpha_bar) -> Plant:
    return Plant(
        n_p=2,
        f_p=lambda xi, u: ex1_plant_dynamics(xi, u, alpha_bar),
        outputs=(lambda xi: xi[0], lambda xi: xi[1] - alpha_bar),
        m_p=2,
        name="ex1 plant",
    )


def V0(xi) -> float:
    return 0.5 * float(xi[0] ** 2 + xi[1] ** 2)


def make_V1(alpha_bar):
    def V1(xi) -> float:
        return 0.25 * float(xi[0]) ** 4 + 0.5 * float(xi[1] - alpha_bar) ** 2

    return V1


def gamma0(s):
    s4 = s ** 4
    return s4 * (1.0 + s * s)


def gamma1(s):
    return 0.0


def half_square(s):
    return 0.5 * s * s


def half_square_inv(s):
    return math.sqrt(2.0 * max(s, 0.0))


def alpha11(r):
    # lower envelope of V1 in terms of |xi - (0, alpha_bar)|
    return min((r / 2.0) ** 4, (r / 2.0) ** 2)


def alpha11_inv(s):
    return 2.0 * max(s ** 0.25, s ** 0.5)


def alpha12(r):
    return 0.25 * r ** 4 + 0.5 * r * r


def ex1_controllers(alpha_bar):
    target1 = np.array([0.0, alpha_bar])
    K0 = HybridController(
        n_c=0,
        kappa=lambda y, z: np.array([0.0, -alpha_bar]),
        target_distance=lambda xi: float(np.hypot(xi[0], xi[1])),
        name="K0 (local)",
    )
    K1 = HybridController(
        n_c=0,
        kappa=lambda y, z: np.array([y[0] + alpha_bar, 0.0]),
        target_distance=lambda xi: float(np.hypot(xi[0] - target1[0], xi[1] - target1[1])),
        name="K1 (global)",
    )
    return K0, K1


def ex1_observers(alpha_bar):
    obs0 = NormObserverSpec(eps=1.0, gamma=gamma0, alpha2=half_square, alpha1=half_square,
                            alpha1_inv=half_square_inv, V=V0, name="obs0")
    obs1 = NormObserverSpec(eps=1.0, gamma=gamma1, alpha2=alpha12, alpha1=alpha11,
                            alpha1_inv=alpha11_inv, V=make_V1(alpha_bar), name="obs1")
    return obs0, obs1


def ex1_local_loop(alpha_bar):
    plant = ex1_plant(alpha_bar)
    K0, _ = ex1_controllers(alpha_bar)
    return compose_closed_loop(plant, K0, 0)


def ex1_build(config: Example1Config = Example1Config(), name="ex1") -> SupervisedLoop:
    a = config.alpha_bar
    plant = ex1_plant(a)
    K0, K1 = ex1_controllers(a)
    obs0, obs1 = ex1_observers(a)
    init = SupervisedState(np.array(config.xi0, dtype=float), np.zeros(0), np.zeros(0),
                           config.z0, config.z1, config.q0, config.tau0)
    return assemble(name, plant, K0, K1, obs0, obs1, config.sup_params, init)


def ex1_design_inputs(eps0b=1.0 / 6.0, eps0a=4.0 / 27.0, eps1b=0.015, Delta=0.25, radius=10.0) -> DesignInputs:
    """Analytic design inputs for the plant from initial conditions in ``radius * B``.

    ``Delta`` bounds the distance of the global controller's start to its
    target (taken from the handoff region) and ``Delta2`` bounds how far the
    local loop can wander while its observer stays below ``eps0a``.
    """
    Delta1 = eps0a
    Delta2 = half_square_inv(Delta1 + 2.0 * half_square(radius + Delta1))
    return DesignInputs(
        eps0b=eps0b, eps1b=eps1b, Delta=Delta, Delta1=Delta1, Delta2=Delta2,
        alpha02=half_square, alpha12=alpha12, eps0=1.0, eps1=1.0,
        alpha01_inv=half_square_inv, alpha11_inv=alpha11_inv,
        alpha01=half_square, alpha11=alpha11, provenance="analytic",
    )
