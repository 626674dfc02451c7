"""Plants, output-feedback hybrid controllers, and their closed loops.

A controller ``K = (kappa, C_c, f_c, D_c, g_c)`` measures ``y = h_i(xi)``
of the plant and feeds ``kappa(y, zeta)`` back as the plant input. The
closed loop ``(P, K)`` has state ``(xi, zeta)``; the plant state never jumps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import HybridSystemDef
from .errors import DimensionMismatch


def _always(value):
    def guard(*_args):
        return value

    return guard


@dataclass(frozen=True)
class Plant:
    n_p: int
    f_p: Callable[[np.ndarray, np.ndarray], np.ndarray]
    outputs: tuple  # h_i: xi -> y_i
    m_p: int
    name: str = "plant"

    def output(self, i: int, xi) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.outputs[i](xi), dtype=float))


@dataclass(frozen=True)
class HybridController:
    """Output-feedback hybrid controller.

    With ``n_c == 0`` the controller is static: it flows everywhere and never
    jumps. ``target_distance`` is ``xi -> |xi|_A`` for the set the closed loop
    is meant to stabilize; ``phi_guard`` is the signed membership of the
    controller-state target set ``Phi`` and ``phi_reset`` a point of it.
    """

    n_c: int
    kappa: Callable[[np.ndarray, np.ndarray], np.ndarray]
    target_distance: Callable[[np.ndarray], float]
    f_c: Optional[Callable] = None
    flow_guard: Optional[Callable] = None
    jump_guard: Optional[Callable] = None
    g_c: Optional[Callable] = None
    phi_reset: np.ndarray = field(default_factory=lambda: np.zeros(0))
    phi_guard: Optional[Callable] = None
    phi_distance: Optional[Callable] = None
    name: str = "controller"

    def __post_init__(self):
        reset = np.asarray(self.phi_reset, dtype=float).reshape(-1)
        object.__setattr__(self, "phi_reset", reset)
        if self.n_c == 0:
            object.__setattr__(self, "f_c", self.f_c or (lambda y, z: np.zeros(0)))
            object.__setattr__(self, "flow_guard", self.flow_guard or _always(1.0))
            object.__setattr__(self, "jump_guard", self.jump_guard or _always(-1.0))
            object.__setattr__(self, "g_c", self.g_c or (lambda y, z: [np.zeros(0)]))
        if reset.shape[0] != self.n_c:
            raise DimensionMismatch(f"{self.name}: Phi representative has dimension {reset.shape[0]}, n_c = {self.n_c}")
        if self.phi_guard is None:
            object.__setattr__(self, "phi_guard", _always(1.0))
        elif self.phi_guard(reset) < 0:
            raise ValueError(f"{self.name}: Phi representative fails the Phi membership guard")
        if self.phi_distance is None:
            object.__setattr__(self, "phi_distance", _always(0.0))
        for name in ("f_c", "flow_guard", "jump_guard", "g_c"):
            if getattr(self, name) is None:
                raise ValueError(f"{self.name}: dynamic controller needs {name}")


def evaluate_controller(ctrl: HybridController, y, zeta) -> np.ndarray:
    """Controller output ``kappa(y, zeta)`` (the plant input)."""
    return np.asarray(ctrl.kappa(np.atleast_1d(y), np.asarray(zeta, dtype=float)), dtype=float)


def pad_controller(ctrl: HybridController, n_c: int) -> HybridController:
    """Embed a controller's state into ``R^n_c`` by appending inert zeros."""
    if n_c == ctrl.n_c:
        return ctrl
    if n_c < ctrl.n_c:
        raise DimensionMismatch("cannot pad to a smaller dimension")
    k = ctrl.n_c

    def lift(fn):
        return lambda y, z: fn(y, z[:k])

    def f_c(y, z):
        return np.concatenate([np.asarray(ctrl.f_c(y, z[:k]), dtype=float), np.zeros(n_c - k)])

    def g_c(y, z):
        return [np.concatenate([np.asarray(g, dtype=float), z[k:]]) for g in ctrl.g_c(y, z[:k])]

    return HybridController(
        n_c=n_c,
        kappa=lift(ctrl.kappa),
        target_distance=ctrl.target_distance,
        f_c=f_c,
        flow_guard=lift(ctrl.flow_guard),
        jump_guard=lift(ctrl.jump_guard),
        g_c=g_c,
        phi_reset=np.concatenate([ctrl.phi_reset, np.zeros(n_c - k)]),
        phi_guard=lambda z: ctrl.phi_guard(z[:k]),
        phi_distance=lambda z: ctrl.phi_distance(z[:k]),
        name=ctrl.name,
    )


def compose_closed_loop(plant: Plant, ctrl: HybridController, output_index: int) -> HybridSystemDef:
    """Build ``(P, K_i)`` with state ``(xi, zeta)`` of dimension ``n_p + n_c``."""
    n_p, n_c = plant.n_p, ctrl.n_c
    h = plant.outputs[output_index]
    probe_xi = np.zeros(n_p)
    probe_u = evaluate_controller(ctrl, plant.output(output_index, probe_xi), np.zeros(n_c))
    if probe_u.shape[0] != plant.m_p:
        raise DimensionMismatch(f"controller output has dimension {probe_u.shape[0]}, plant input {plant.m_p}")

    def split(x):
        return x[:n_p], x[n_p:]

    def y_of(xi):
        return np.atleast_1d(np.asarray(h(xi), dtype=float))

    def flow(x):
        xi, zeta = split(x)
        y = y_of(xi)
        u = np.asarray(ctrl.kappa(y, zeta), dtype=float)
        dxi = np.asarray(plant.f_p(xi, u), dtype=float)
        if n_c == 0:
            return dxi
        return np.concatenate([dxi, np.asarray(ctrl.f_c(y, zeta), dtype=float)])

    def flow_guard(x):
        xi, zeta = split(x)
        return float(ctrl.flow_guard(y_of(xi), zeta))

    def jump_guard(x):
        xi, zeta = split(x)
        return float(ctrl.jump_guard(y_of(xi), zeta))

    def jump_map(x):
        xi, zeta = split(x)
        return [np.concatenate([xi, np.asarray(g, dtype=float)]) for g in ctrl.g_c(y_of(xi), zeta)]

    def output(x):
        return y_of(x[:n_p])

    return HybridSystemDef(
        dim=n_p + n_c,
        flow=flow,
        flow_guard=flow_guard,
        jump_map=jump_map,
        jump_guard=jump_guard,
        output=output,
        name=f"({plant.name}, {ctrl.name})",
    )
