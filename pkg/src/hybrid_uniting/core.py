"""Hybrid systems: data, solutions, and a fixed-step event-driven solver.

A hybrid system is given by a flow map ``F`` on a flow set ``C`` and a jump
map ``G`` on a jump set ``D``. Sets are encoded by continuous signed guard
functions: ``flow_guard(x) >= 0`` iff ``x`` is in ``C`` and
``jump_guard(x) >= 0`` iff ``x`` is in ``D``. Solutions are hybrid arcs
parameterized by ordinary time ``t`` and jump count ``j``.

Flows are integrated with classical RK4 at a fixed step. When the jump guard
becomes nonnegative, or the flow guard negative, inside a step, the event is
localized by bisection on the step length (each trial re-integrates a single
RK4 step of the trial length from the step start).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._backend import kernels
from .errors import EmptyJumpMap, InvalidConfig, NoProgress, NumericalBlowup

State = np.ndarray


class Termination(str, enum.Enum):
    HORIZON_T = "HorizonT"
    HORIZON_J = "HorizonJ"
    FLOW_SET_EXIT = "FlowSetExit"
    NO_PROGRESS = "NoProgress"
    CONVERGED = "Converged"


class JumpPriority(str, enum.Enum):
    JUMP_FIRST = "JumpFirst"
    FLOW_FIRST = "FlowFirst"


class Hit(str, enum.Enum):
    JUMP_GUARD = "JumpGuard"
    FLOW_EXIT = "FlowExit"
    BUDGET = "Budget"


@dataclass(frozen=True)
class HybridTimeStamp:
    t: float
    j: int

    def __post_init__(self):
        if not self.t >= 0 or self.j < 0:
            raise ValueError(f"invalid hybrid time ({self.t}, {self.j})")


@dataclass(frozen=True)
class HybridTimeDomain:
    """Ordered intervals ``([t_j, t_{j+1}], j)``; degenerate intervals allowed."""

    intervals: tuple[tuple[float, float, int], ...]

    def __post_init__(self):
        prev_end = 0.0
        for k, (a, b, j) in enumerate(self.intervals):
            if j != k or a > b or a < prev_end:
                raise ValueError(f"malformed hybrid time domain at interval {k}")
            prev_end = b

    @property
    def jump_times(self) -> list[float]:
        return [b for (_, b, _) in self.intervals[:-1]]

    def __contains__(self, stamp) -> bool:
        t, j = stamp if not isinstance(stamp, HybridTimeStamp) else (stamp.t, stamp.j)
        if j >= len(self.intervals):
            return False
        a, b, _ = self.intervals[j]
        return a <= t <= b


@dataclass
class ArcInterval:
    """Samples of one flow interval. ``x`` has shape (k, n)."""

    j: int
    t: np.ndarray
    x: np.ndarray


@dataclass
class HybridArc:
    intervals: list[ArcInterval]
    termination: Termination
    dim: int

    @property
    def domain(self) -> HybridTimeDomain:
        return HybridTimeDomain(
            tuple((float(iv.t[0]), float(iv.t[-1]), iv.j) for iv in self.intervals)
        )

    @property
    def jumps(self) -> int:
        return len(self.intervals) - 1

    @property
    def final_state(self) -> State:
        return self.intervals[-1].x[-1]

    @property
    def final_stamp(self) -> HybridTimeStamp:
        last = self.intervals[-1]
        return HybridTimeStamp(float(last.t[-1]), last.j)

    def samples(self):
        """Yield ``(t, j, x)`` for every sample in hybrid-time order."""
        for iv in self.intervals:
            for t, x in zip(iv.t, iv.x):
                yield float(t), iv.j, x

    def stacked(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """All samples as arrays ``(t, j, x)``."""
        t = np.concatenate([iv.t for iv in self.intervals])
        j = np.concatenate([np.full(len(iv.t), iv.j, dtype=int) for iv in self.intervals])
        x = np.vstack([iv.x for iv in self.intervals])
        return t, j, x

    def jump_pairs(self):
        """Yield ``(t, j, pre, post)`` for every jump of the arc."""
        for a, b in zip(self.intervals[:-1], self.intervals[1:]):
            yield float(a.t[-1]), a.j, a.x[-1], b.x[0]


@dataclass(frozen=True)
class HybridSystemDef:
    """Data ``(C, F, D, G)`` plus an output.

    ``converged`` is an optional predicate; when it holds for ``settle_time``
    seconds of uninterrupted flow the solver stops with ``Converged``.
    """

    dim: int
    flow: Callable[[State], State]
    flow_guard: Callable[[State], float]
    jump_map: Callable[[State], Sequence[State]]
    jump_guard: Callable[[State], float]
    output: Optional[Callable[[State], np.ndarray]] = None
    converged: Optional[Callable[[State], bool]] = None
    name: str = "hybrid system"


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 1e-2
    guard_tol: float = 1e-8
    max_t: float = 10.0
    max_j: int = 1000
    jump_priority: JumpPriority = JumpPriority.JUMP_FIRST
    refine_iters: int = 60
    settle_time: float = 1.0

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InvalidConfig(f"dt must be positive, got {self.dt}", "dt")
        if not self.guard_tol > 0:
            raise InvalidConfig(f"guard_tol must be positive, got {self.guard_tol}", "guard_tol")
        if self.refine_iters < 1:
            raise InvalidConfig("refine_iters must be >= 1", "refine_iters")
        if not self.max_t >= 0:
            raise InvalidConfig("max_t must be nonnegative", "max_t")
        if self.max_j < 0:
            raise InvalidConfig("max_j must be nonnegative", "max_j")
        object.__setattr__(self, "jump_priority", JumpPriority(self.jump_priority))


def _as_state(x) -> State:
    return np.array(x, dtype=float).reshape(-1)


def _step(system: HybridSystemDef, x: State, h: float) -> State:
    with np.errstate(all="ignore"):
        return kernels.rk4_step(system.flow, x, h)


class _FlowRun:
    """Integrates one flow interval; shared by ``advance_flow`` and ``solve``."""

    def __init__(self, system, cfg, watch_jump=True):
        self.system = system
        self.cfg = cfg
        self.watch_jump = watch_jump

    def _event(self, y, armed):
        """Classify a trial state: 0 none, 1 jump guard, 2 flow exit, 3 blowup."""
        if not kernels.all_finite(y):
            return 3
        if armed and self.system.jump_guard(y) >= 0.0:
            return 1
        if self.system.flow_guard(y) < 0.0:
            return 2
        return 0

    def _localize(self, x, h, armed):
        lo, hi = 0.0, h
        y_hi = None
        # bracket well below guard_tol so the one-sided overshoot does not
        # accumulate to guard_tol over a run of consecutive events
        width = 1e-3 * self.cfg.guard_tol
        for _ in range(self.cfg.refine_iters):
            if hi - lo <= width:
                break
            mid = 0.5 * (lo + hi)
            y = _step(self.system, x, mid)
            if self._event(y, armed):
                hi, y_hi = mid, y
            else:
                lo = mid
        if y_hi is None:
            y_hi = _step(self.system, x, hi)
        return hi, y_hi, self._event(y_hi, armed)

    def run(self, x, t0, budget, record=None, stop=None):
        """Flow from ``x`` for at most ``budget`` seconds.

        ``record(t, x)`` receives every accepted sample after the start.
        ``stop(t, x)`` may return True to end the flow early (reported as
        Budget). Returns ``(x, elapsed, hit)``.
        """
        system, cfg = self.system, self.cfg
        armed = self.watch_jump and system.jump_guard(x) < 0.0
        elapsed = 0.0
        eps_t = 1e-12 * max(1.0, abs(t0) + budget)
        while budget - elapsed > eps_t:
            h = min(cfg.dt, budget - elapsed)
            y = _step(system, x, h)
            ev = self._event(y, armed)
            if ev:
                h, y, ev = self._localize(x, h, armed)
                if ev == 3:
                    raise NumericalBlowup(
                        f"non-finite state while flowing at t={t0 + elapsed + h:.17g}"
                    )
            elapsed += h
            x = y
            if record is not None:
                record(t0 + elapsed, x)
            if ev == 1:
                return x, elapsed, Hit.JUMP_GUARD
            if ev == 2:
                return x, elapsed, Hit.FLOW_EXIT
            if self.watch_jump and not armed and system.jump_guard(x) < 0.0:
                armed = True
            if stop is not None and stop(t0 + elapsed, x):
                break
        return x, elapsed, Hit.BUDGET


def advance_flow(system: HybridSystemDef, x, t_budget: float, cfg: SolverConfig):
    """Flow from ``x`` until the jump guard fires, C is left, or time runs out.

    The jump guard is only watched once it has been negative during this
    flow, so a flow that starts inside C ∩ D does not stop immediately.
    Returns ``(state, elapsed, hit)``.
    """
    x = _as_state(x)
    if system.flow_guard(x) < -cfg.guard_tol:
        raise ValueError("advance_flow requires a state in the flow set")
    y, elapsed, hit = _FlowRun(system, cfg).run(x, 0.0, float(t_budget))
    return y, elapsed, hit


def apply_jump(system: HybridSystemDef, x, selector=None) -> State:
    """Return the selected element of ``G(x)``.

    ``selector`` is an index into the enumerated jump map, a callable picking
    one element from the list, or None for the first element.
    """
    succ = list(system.jump_map(_as_state(x)))
    if not succ:
        raise EmptyJumpMap(f"jump map of {system.name} is empty at {x}")
    if selector is None:
        chosen = succ[0]
    elif callable(selector):
        chosen = selector(succ)
    else:
        chosen = succ[selector]
    return _as_state(chosen)


def solve(system: HybridSystemDef, x0, cfg: SolverConfig, selector=None) -> HybridArc:
    """Compute one maximal (up to the horizons) solution from ``x0``.

    Jump-first (default) jumps whenever the state is in D; flow-first jumps
    only when flowing is impossible. More than ``max_j`` consecutive jumps
    without ordinary-time progress beyond ``guard_tol`` end the arc with
    ``NoProgress``.
    """
    x = _as_state(x0)
    if x.shape[0] != system.dim:
        raise ValueError(f"x0 has dimension {x.shape[0]}, system expects {system.dim}")
    tol = cfg.guard_tol
    if system.flow_guard(x) < -tol and system.jump_guard(x) < -tol:
        raise NoProgress("initial state is in neither the flow set nor the jump set")

    t, j = 0.0, 0
    ts, xs = [t], [x]
    intervals: list[ArcInterval] = []
    runner = _FlowRun(system, cfg)
    stalled = 0
    settle = {"since": None}
    jump_first = cfg.jump_priority is JumpPriority.JUMP_FIRST

    def close_interval():
        intervals.append(ArcInterval(j, np.array(ts), np.array(xs)))

    def record(tt, xx):
        ts.append(tt)
        xs.append(xx)

    def stop(tt, xx):
        if system.converged is None:
            return False
        if system.converged(xx):
            if settle["since"] is None:
                settle["since"] = tt
            return tt - settle["since"] >= cfg.settle_time
        settle["since"] = None
        return False

    termination = None
    while termination is None:
        g_d = system.jump_guard(x)
        in_c = system.flow_guard(x) >= 0.0
        # outside C, a jump-guard value within tolerance still counts as D
        in_d = g_d >= 0.0 or (not in_c and g_d >= -tol)
        if in_d and (jump_first or not in_c):
            if j >= cfg.max_j:
                termination = (
                    Termination.NO_PROGRESS if stalled >= cfg.max_j else Termination.HORIZON_J
                )
                break
            close_interval()
            x = apply_jump(system, x, selector)
            j += 1
            stalled += 1
            settle["since"] = None
            ts, xs = [t], [x]
            continue
        if not in_c:
            termination = Termination.FLOW_SET_EXIT
            break
        if t >= cfg.max_t:
            termination = Termination.HORIZON_T
            break
        t_start = t
        try:
            x, elapsed, hit = runner.run(x, t, cfg.max_t - t, record, stop)
        except NumericalBlowup as exc:
            close_interval()
            exc.arc = HybridArc(intervals, Termination.NO_PROGRESS, system.dim)
            raise
        t = t_start + elapsed
        if elapsed > tol:
            stalled = 0
        if hit is Hit.BUDGET:
            if settle["since"] is not None and t - settle["since"] >= cfg.settle_time:
                termination = Termination.CONVERGED
            elif t >= cfg.max_t - 1e-12 * max(1.0, cfg.max_t):
                termination = Termination.HORIZON_T
        elif hit is Hit.FLOW_EXIT and system.jump_guard(x) < -tol:
            termination = Termination.FLOW_SET_EXIT
    close_interval()
    return HybridArc(intervals, termination, system.dim)


@dataclass
class Violation:
    kind: str  # "S1", "S1-derivative", "S2-set", "S2-map"
    t: float
    j: int
    value: float
    detail: str = ""


def check_solution(
    arc: HybridArc,
    system: HybridSystemDef,
    tol: float = 1e-6,
    rel_tol: float = 1e-2,
) -> list[Violation]:
    """Re-check the solution conditions along ``arc``.

    Flow-set membership is checked at every sample of an interval except its
    last one; the derivative check compares each finite difference against
    ``F`` at the chord midpoint, so it is second-order accurate and
    ``rel_tol`` only needs to absorb the step size. Jumps are checked for
    jump-set membership of the pre-jump state and membership of the
    post-jump state in the enumerated jump map.
    """
    out: list[Violation] = []
    for iv in arc.intervals:
        for k in range(len(iv.t) - 1):
            x = iv.x[k]
            g = system.flow_guard(x)
            if g < -tol:
                out.append(Violation("S1", float(iv.t[k]), iv.j, float(g), "state outside C"))
            h = iv.t[k + 1] - iv.t[k]
            if h <= 0:
                continue
            fd = (iv.x[k + 1] - x) / h
            f_mid = np.asarray(system.flow(0.5 * (x + iv.x[k + 1])), dtype=float)
            err = float(np.max(np.abs(fd - f_mid) / (1.0 + np.abs(f_mid))))
            if not err <= rel_tol:
                out.append(
                    Violation("S1-derivative", float(iv.t[k]), iv.j, err, "finite difference disagrees with F")
                )
    for t, j, pre, post in arc.jump_pairs():
        g = system.jump_guard(pre)
        if g < -tol:
            out.append(Violation("S2-set", t, j, float(g), "pre-jump state outside D"))
            continue
        succ = list(system.jump_map(pre))
        dist = min((float(np.max(np.abs(np.asarray(s) - post))) for s in succ), default=math.inf)
        if dist > tol:
            out.append(Violation("S2-map", t, j, dist, "post-jump state not in G(pre)"))
    return out


def sample_closedness(guard, points, radius=1e-6, seed=0, n=8):
    """Spot-check that ``{guard >= 0}`` looks closed near the given points.

    For each point with guard value in ``[0, radius]`` (near the boundary)
    the guard is evaluated on ``n`` nearby points; a set is flagged when a
    sequence of members approaches a non-member within ``radius`` of it,
    i.e. when the guard jumps across zero. Returns suspicious points.
    """
    rng = np.random.default_rng(seed)
    bad = []
    for p in np.atleast_2d(points):
        gp = guard(p)
        for _ in range(n):
            q = p + rng.uniform(-radius, radius, size=p.shape)
            gq = guard(q)
            if (gq >= 0) != (gp >= 0) and abs(gq - gp) > 1e3 * radius + 1e-9:
                bad.append(np.array(p))
                break
    return bad
