"""Norm observers for output-to-state stable closed loops.

For a closed loop with OSS-Lyapunov function ``V`` satisfying

    alpha1(|x|) <= V(x) <= alpha2(|x|),
    dV/dt <= -eps V + gamma(|y|)        on flows,
    V(x+) - V(x) <= -eps V + gamma(|y|)  at jumps,

the scalar filter ``z' = -eps z + gamma(|y|)``, ``z+ = (1 - eps) z + gamma(|y|)``
satisfies ``V <= z + beta(|x(0,0)| + z(0,0), t, j)`` with
``beta(s, t, j) = 2 exp(-eps t) (1 - eps)^j alpha2(s)``, so ``z`` yields a
computable upper bound on the distance of the state to the attractor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import HybridArc, HybridSystemDef
from .errors import BracketFailure, InvalidParams, MissingLyapunov

_GRID = np.linspace(0.0, 1e3, 10_001)


@dataclass(frozen=True)
class NormObserverSpec:
    """Decay rate, gain and comparison envelopes of one norm observer.

    ``output_norm(y, zeta)`` replaces ``|y|`` as the gain argument when the
    measured quantity depends on the controller state as well.
    """

    eps: float
    gamma: Callable[[float], float]
    alpha2: Callable[[float], float]
    alpha1: Optional[Callable[[float], float]] = None
    alpha1_inv: Optional[Callable[[float], float]] = None
    V: Optional[Callable[[np.ndarray], float]] = None
    output_norm: Optional[Callable] = None
    name: str = "observer"

    def __post_init__(self):
        if not (0.0 < self.eps <= 1.0):
            raise InvalidParams(f"{self.name}: eps must lie in (0, 1], got {self.eps}")
        if self.gamma(0.0) != 0.0:
            raise InvalidParams(f"{self.name}: gamma(0) must be 0")
        with np.errstate(over="ignore"):
            g = np.array([self.gamma(s) for s in _GRID])
            if np.any(np.diff(g) < 0):
                raise InvalidParams(f"{self.name}: gamma is not nondecreasing on [0, 1e3]")
            if self.alpha1 is not None:
                a1 = np.array([self.alpha1(s) for s in _GRID[:2001]])
                a2 = np.array([self.alpha2(s) for s in _GRID[:2001]])
                if np.any(a1 > a2 * (1 + 1e-12)):
                    raise InvalidParams(f"{self.name}: alpha1 exceeds alpha2 on the sample grid")

    def gain(self, y, zeta=None) -> float:
        if self.output_norm is not None:
            s = self.output_norm(y, zeta)
        else:
            s = float(np.linalg.norm(np.atleast_1d(y)))
        return float(self.gamma(s))


def observer_flow(spec: NormObserverSpec, z: float, y, zeta=None) -> float:
    return -spec.eps * z + spec.gain(y, zeta)


def observer_jump(spec: NormObserverSpec, z: float, y, zeta=None) -> float:
    return (1.0 - spec.eps) * z + spec.gain(y, zeta)


def beta(spec: NormObserverSpec, s: float, t: float, j: int) -> float:
    return 2.0 * math.exp(-spec.eps * t) * (1.0 - spec.eps) ** j * spec.alpha2(s)


def invert_class_k(fn, value: float, iters: int = 60, max_doublings: int = 200) -> float:
    """Solve ``fn(r) = value`` for a class-K-infinity ``fn`` by bisection."""
    if value <= 0.0:
        return 0.0
    hi = 1.0
    for _ in range(max_doublings):
        if fn(hi) >= value:
            break
        hi *= 2.0
    else:
        raise BracketFailure(f"could not bracket inverse at value {value}")
    lo = 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if fn(mid) >= value:
            hi = mid
        else:
            lo = mid
    return hi


def alpha1_inverse(spec: NormObserverSpec, s: float) -> float:
    if spec.alpha1_inv is not None:
        return float(spec.alpha1_inv(s))
    if spec.alpha1 is None:
        raise InvalidParams(f"{spec.name}: neither alpha1 nor its inverse is given")
    return invert_class_k(spec.alpha1, s)


def state_norm_bound(spec: NormObserverSpec, z: float, x0_dist: float, z0: float, t: float, j: int) -> float:
    """Certified bound on the distance to the attractor given the observer value."""
    return alpha1_inverse(spec, z + beta(spec, x0_dist + z0, t, j))


def append_observer(system: HybridSystemDef, spec: NormObserverSpec, controller_dim: int = 0) -> HybridSystemDef:
    """Append the observer state ``z`` as the last coordinate of ``system``.

    The last ``controller_dim`` coordinates of the original state are passed
    to ``output_norm`` as the controller state.
    """
    n = system.dim
    if system.output is None:
        raise InvalidParams("system has no output for the observer to read")

    def zeta_of(x):
        return x[n - controller_dim : n]

    def flow(x):
        base = np.asarray(system.flow(x[:n]), dtype=float)
        dz = observer_flow(spec, x[n], system.output(x[:n]), zeta_of(x))
        return np.append(base, dz)

    def jump_map(x):
        zp = observer_jump(spec, x[n], system.output(x[:n]), zeta_of(x))
        return [np.append(np.asarray(g, dtype=float), zp) for g in system.jump_map(x[:n])]

    return HybridSystemDef(
        dim=n + 1,
        flow=flow,
        flow_guard=lambda x: system.flow_guard(x[:n]),
        jump_map=jump_map,
        jump_guard=lambda x: system.jump_guard(x[:n]),
        output=lambda x: system.output(x[:n]),
        converged=None,
        name=f"{system.name} + norm observer",
    )


def observer_bound_margins(arc: HybridArc, spec: NormObserverSpec, distance, z_index: int = -1,
                           state=None, t0: float = 0.0, j0: int = 0, start=None):
    """``V(x) - z - beta(...)`` at every sample of ``arc``.

    ``distance(x)`` is the distance to the attractor and ``state(x)`` extracts
    the argument of ``V`` (defaults to the identity). ``start`` is the
    initial state the bound refers to (defaults to the first sample); times
    are measured from ``(t0, j0)``.
    """
    if spec.V is None:
        raise MissingLyapunov(f"{spec.name}: no Lyapunov function attached")
    state = state or (lambda x: x)
    x_start = arc.intervals[0].x[0] if start is None else start
    s0 = distance(x_start) + abs(x_start[z_index])
    out = []
    for t, j, x in arc.samples():
        out.append(spec.V(state(x)) - x[z_index] - beta(spec, s0, t - t0, j - j0))
    return np.array(out)


def check_observer_bound(arc: HybridArc, spec: NormObserverSpec, distance, z_index: int = -1, state=None) -> float:
    """Largest value of ``V(x) - z - beta(|x(0,0)| + z(0,0), t, j)`` along ``arc``.

    A nonpositive result certifies the observer bound along this trajectory.
    """
    return float(np.max(observer_bound_margins(arc, spec, distance, z_index, state)))
