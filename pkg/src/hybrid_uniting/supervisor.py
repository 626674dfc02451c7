"""Hybrid supervisor uniting a global controller K1 and a local controller K0.

The closed loop has state ``chi = (xi, zeta0, zeta1, z0, z1, q, tau)``: plant
state, both controller states, both norm-observer states, the active mode
``q`` and a dwell timer ``tau``. With ``q = 1`` the global controller runs
until its observer reports ``z1 <= eps1a`` and at least ``tau_star`` seconds
have passed; with ``q = 0`` the local controller runs while its observer stays
below ``eps0a``. Every supervisor jump resets both controller states to their
target sets, zeroes ``z0, z1, tau`` and flips ``q``.

Set equalities such as ``z1 = 0`` are encoded as bands ``|z1| <= band``; the
supervisor's own resets place those coordinates exactly at zero and the
gated flow keeps them there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .composer import HybridController, Plant
from .core import HybridArc, HybridSystemDef
from .errors import DimensionMismatch, InvalidParams
from .observer import NormObserverSpec, beta


@dataclass(frozen=True)
class SupervisorParams:
    eps0a: float
    eps1a: float
    tau_star: float
    phi0_reset: Optional[np.ndarray] = None
    phi1_reset: Optional[np.ndarray] = None
    band: float = 1e-8
    conv_tol: float = 1e-3

    def __post_init__(self):
        for name in ("eps0a", "eps1a", "tau_star", "band", "conv_tol"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise InvalidParams(f"{name} must be positive and finite, got {value}")


@dataclass(frozen=True)
class SupervisedState:
    xi: np.ndarray
    zeta0: np.ndarray
    zeta1: np.ndarray
    z0: float = 0.0
    z1: float = 0.0
    q: int = 1
    tau: float = 0.0

    def __post_init__(self):
        if self.q not in (0, 1):
            raise InvalidParams(f"q must be 0 or 1, got {self.q}")
        if self.z0 < 0 or self.z1 < 0 or self.tau < 0:
            raise InvalidParams("z0, z1 and tau must be nonnegative")


@dataclass(frozen=True)
class SupervisedLayout:
    """Index bookkeeping for ``chi = (xi, zeta0, zeta1, z0, z1, q, tau)``."""

    n_p: int
    n_c: int

    @property
    def dim(self) -> int:
        return self.n_p + 2 * self.n_c + 4

    @property
    def xi(self) -> slice:
        return slice(0, self.n_p)

    @property
    def zeta0(self) -> slice:
        return slice(self.n_p, self.n_p + self.n_c)

    @property
    def zeta1(self) -> slice:
        return slice(self.n_p + self.n_c, self.n_p + 2 * self.n_c)

    @property
    def z0(self) -> int:
        return self.n_p + 2 * self.n_c

    @property
    def z1(self) -> int:
        return self.z0 + 1

    @property
    def q(self) -> int:
        return self.z0 + 2

    @property
    def tau(self) -> int:
        return self.z0 + 3

    def zeta(self, i: int) -> slice:
        return self.zeta1 if i else self.zeta0

    def z(self, i: int) -> int:
        return self.z1 if i else self.z0

    def pack(self, s: SupervisedState) -> np.ndarray:
        xi = np.asarray(s.xi, dtype=float).reshape(-1)
        zeta0 = np.asarray(s.zeta0, dtype=float).reshape(-1)
        zeta1 = np.asarray(s.zeta1, dtype=float).reshape(-1)
        if xi.shape[0] != self.n_p or zeta0.shape[0] != self.n_c or zeta1.shape[0] != self.n_c:
            raise DimensionMismatch("state components do not match the layout")
        return np.concatenate([xi, zeta0, zeta1, [s.z0, s.z1, float(s.q), s.tau]])

    def unpack(self, x) -> SupervisedState:
        x = np.asarray(x, dtype=float)
        return SupervisedState(
            x[self.xi].copy(), x[self.zeta0].copy(), x[self.zeta1].copy(),
            float(x[self.z0]), float(x[self.z1]), int(round(x[self.q])), float(x[self.tau]),
        )

    def columns(self) -> list[str]:
        names = [f"xi{k}" for k in range(self.n_p)]
        names += [f"zeta0_{k}" for k in range(self.n_c)]
        names += [f"zeta1_{k}" for k in range(self.n_c)]
        return names + ["z0", "z1", "q", "tau"]


def _mode(x, layout) -> int:
    return 1 if x[layout.q] >= 0.5 else 0


def supervisor_guards(x, layout: SupervisedLayout, params: SupervisorParams, K0, K1):
    """Signed memberships of ``C_{s,a}, C_{s,b}, C_{s,c}, D_{s,a}, D_{s,b}``."""
    band = params.band
    zeta0, zeta1 = x[layout.zeta0], x[layout.zeta1]
    z0, z1, q, tau = x[layout.z0], x[layout.z1], x[layout.q], x[layout.tau]
    in_phi0 = K0.phi_guard(zeta0) + band
    in_phi1 = K1.phi_guard(zeta1) + band
    is_q0 = band - abs(q)
    is_q1 = band - abs(q - 1.0)
    z0_zero = band - abs(z0)
    z1_zero = band - abs(z1)
    tau_zero = band - abs(tau)
    c_a = min(in_phi1, params.eps0a - z0, z0 + band, z1_zero, is_q0, tau_zero)
    c_b = min(in_phi0, z0_zero, z1 - params.eps1a, is_q1)
    c_c = min(in_phi0, z0_zero, z1 + band, is_q1, params.tau_star - tau)
    d_a = min(in_phi1, z0 - params.eps0a, z1_zero, is_q0, tau_zero)
    d_b = min(in_phi0, z0_zero, params.eps1a - z1, z1 + band, is_q1, tau - params.tau_star)
    return c_a, c_b, c_c, d_a, d_b


def build_supervised_system(
    plant: Plant,
    K0: HybridController,
    K1: HybridController,
    obs0: NormObserverSpec,
    obs1: NormObserverSpec,
    params: SupervisorParams,
    name: str = "supervised loop",
) -> HybridSystemDef:
    """Closed loop of the plant, both controllers, both observers and the supervisor."""
    if K0.n_c != K1.n_c:
        raise DimensionMismatch(f"controllers must share a state dimension (got {K0.n_c} and {K1.n_c})")
    layout = SupervisedLayout(plant.n_p, K0.n_c)
    ctrls = (K0, K1)
    obs = (obs0, obs1)
    h = (plant.outputs[0], plant.outputs[1])
    reset0 = K0.phi_reset if params.phi0_reset is None else np.asarray(params.phi0_reset, dtype=float)
    reset1 = K1.phi_reset if params.phi1_reset is None else np.asarray(params.phi1_reset, dtype=float)
    if reset0.shape[0] != layout.n_c or reset1.shape[0] != layout.n_c:
        raise DimensionMismatch("controller-state resets do not match n_c")

    def y_of(i, xi):
        return np.atleast_1d(np.asarray(h[i](xi), dtype=float))

    def flow(x):
        i = _mode(x, layout)
        xi, zeta = x[layout.xi], x[layout.zeta(i)]
        y = y_of(i, xi)
        u = np.asarray(ctrls[i].kappa(y, zeta), dtype=float)
        dx = np.zeros(layout.dim)
        dx[layout.xi] = plant.f_p(xi, u)
        if layout.n_c:
            dx[layout.zeta(i)] = ctrls[i].f_c(y, zeta)
        dx[layout.z(i)] = -obs[i].eps * x[layout.z(i)] + obs[i].gain(y, zeta)
        dx[layout.tau] = float(i)
        return dx

    def controller_guard(x, which):
        i = _mode(x, layout)
        xi, zeta = x[layout.xi], x[layout.zeta(i)]
        g = ctrls[i].flow_guard if which == "flow" else ctrls[i].jump_guard
        return float(g(y_of(i, xi), zeta))

    def flow_guard(x):
        c_a, c_b, c_c, _, _ = supervisor_guards(x, layout, params, K0, K1)
        return min(controller_guard(x, "flow"), max(c_a, c_b, c_c))

    def jump_guard(x):
        _, _, _, d_a, d_b = supervisor_guards(x, layout, params, K0, K1)
        return max(controller_guard(x, "jump"), d_a, d_b)

    def supervisor_reset(x):
        out = x.copy()
        out[layout.zeta0] = reset0
        out[layout.zeta1] = reset1
        out[layout.z0] = 0.0
        out[layout.z1] = 0.0
        out[layout.q] = 1.0 - float(_mode(x, layout))
        out[layout.tau] = 0.0
        return out

    def controller_jumps(x):
        i = _mode(x, layout)
        xi, zeta = x[layout.xi], x[layout.zeta(i)]
        y = y_of(i, xi)
        zp = (1.0 - obs[i].eps) * x[layout.z(i)] + obs[i].gain(y, zeta)
        out = []
        for g in ctrls[i].g_c(y, zeta):
            nxt = x.copy()
            if layout.n_c:
                nxt[layout.zeta(i)] = g
            nxt[layout.z(i)] = zp
            out.append(nxt)
        return out

    def jump_map(x):
        _, _, _, d_a, d_b = supervisor_guards(x, layout, params, K0, K1)
        g_sup = max(d_a, d_b)
        g_ctl = controller_guard(x, "jump")
        take_sup = g_sup >= 0.0 or (g_ctl < 0.0 and g_sup >= g_ctl)
        take_ctl = g_ctl >= 0.0 or (g_sup < 0.0 and g_ctl > g_sup)
        out = []
        if take_sup:
            out.append(supervisor_reset(x))
        if take_ctl:
            out.extend(controller_jumps(x))
        return out

    def converged(x):
        return _mode(x, layout) == 0 and K0.target_distance(x[layout.xi]) <= params.conv_tol

    return HybridSystemDef(
        dim=layout.dim,
        flow=flow,
        flow_guard=flow_guard,
        jump_map=jump_map,
        jump_guard=jump_guard,
        output=lambda x: x[layout.xi].copy(),
        converged=converged,
        name=name,
    )


@dataclass(frozen=True)
class SwitchEvent:
    t: float
    j: int
    q_from: int
    q_to: int


@dataclass(frozen=True)
class SwitchingCensus:
    count_0to1: int
    count_1to0: int
    min_dwell_t: float
    events: tuple

    @property
    def total(self) -> int:
        return self.count_0to1 + self.count_1to0


def switch_events(arc: HybridArc, layout: SupervisedLayout) -> list[SwitchEvent]:
    out = []
    for t, j, pre, post in arc.jump_pairs():
        a, b = _mode(pre, layout), _mode(post, layout)
        if a != b:
            out.append(SwitchEvent(t, j, a, b))
    return out


def switching_census(arc: HybridArc, layout: SupervisedLayout) -> SwitchingCensus:
    """Count supervisor switches and the smallest gap between 1 -> 0 switches."""
    events = switch_events(arc, layout)
    down = [e.t for e in events if e.q_to == 0]
    gaps = np.diff(down)
    return SwitchingCensus(
        count_0to1=sum(1 for e in events if e.q_to == 1),
        count_1to0=len(down),
        min_dwell_t=float(gaps.min()) if gaps.size else math.inf,
        events=tuple(events),
    )


@dataclass
class Phase:
    """Maximal stretch of an arc with constant mode ``q``."""

    q: int
    t0: float
    j0: int
    arc: HybridArc


def phases(arc: HybridArc, layout: SupervisedLayout) -> list[Phase]:
    out: list[Phase] = []
    for iv in arc.intervals:
        q = _mode(iv.x[0], layout)
        if out and out[-1].q == q:
            out[-1].arc.intervals.append(iv)
        else:
            out.append(Phase(q, float(iv.t[0]), iv.j, HybridArc([iv], arc.termination, arc.dim)))
    return out


def supervised_observer_margins(arc, layout, K0, K1, obs0, obs1):
    """Observer-bound margins per phase: ``V_q - z_q - beta_q`` from the phase start.

    Each phase is a solution of the closed loop with the active controller,
    issued from the state at the start of the phase. Returns a list of
    ``(q, t0, j0, margins)``.
    """
    ctrls = (K0, K1)
    obs = (obs0, obs1)
    out = []
    for ph in phases(arc, layout):
        i = ph.q
        spec, ctrl = obs[i], ctrls[i]
        zs, zi = layout.zeta(i), layout.z(i)
        x_start = ph.arc.intervals[0].x[0]
        s0 = ctrl.target_distance(x_start[layout.xi]) + ctrl.phi_distance(x_start[zs]) + abs(x_start[zi])
        margins = []
        for t, j, x in ph.arc.samples():
            v = spec.V(np.concatenate([x[layout.xi], x[zs]]))
            margins.append(v - x[zi] - beta(spec, s0, t - ph.t0, j - ph.j0))
        out.append((i, ph.t0, ph.j0, np.array(margins)))
    return out


def distance_to_attractor(x, layout: SupervisedLayout, K0: HybridController) -> float:
    """Distance of ``chi`` to the final attractor, counting ``q`` itself as a distance."""
    s = layout.unpack(x)
    parts = [K0.target_distance(s.xi), K0.phi_distance(s.zeta0), abs(s.z0), abs(s.z1), float(s.q), abs(s.tau)]
    return float(math.sqrt(sum(p * p for p in parts)))


@dataclass
class SupervisedLoop:
    """A built supervised closed loop together with its ingredients."""

    name: str
    plant: Plant
    K0: HybridController
    K1: HybridController
    obs0: NormObserverSpec
    obs1: NormObserverSpec
    params: SupervisorParams
    layout: SupervisedLayout
    system: HybridSystemDef
    x0: np.ndarray

    def distance_A0(self, x) -> float:
        return float(self.K0.target_distance(np.asarray(x)[self.layout.xi]))

    def observer_margins(self, arc):
        return supervised_observer_margins(arc, self.layout, self.K0, self.K1, self.obs0, self.obs1)


def assemble(name, plant, K0, K1, obs0, obs1, params, initial: SupervisedState) -> SupervisedLoop:
    system = build_supervised_system(plant, K0, K1, obs0, obs1, params, name=name)
    layout = SupervisedLayout(plant.n_p, K0.n_c)
    return SupervisedLoop(name, plant, K0, K1, obs0, obs1, params, layout, system, layout.pack(initial))
