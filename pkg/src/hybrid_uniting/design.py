"""Parameter design for the supervisor.

Step 1 picks a sublevel ``{V0 <= eps0b}`` inside the local controller's basin.
Step 2 picks ``eps0a < eps0b`` and ``eps1b`` so that the handoff region
``{V1 <= eps1b}`` lies inside that sublevel and the local observer's input
stays below ``eps0a * eps0`` along every local-controller solution from it.
Step 3 picks ``eps1a`` and the dwell time ``tau_star`` so that

    alpha12(alpha11^-1(eps1a + b1(Delta + alpha01^-1(Delta1 + b0(Delta2, tau)), tau))) <= eps1b

with ``b_i(s, t) = 2 exp(-eps_i t) alpha_i2(s)``. The left-hand side shrinks
with ``tau`` and grows with ``eps1a``, so small thresholds and long dwell
times always satisfy it.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import HybridSystemDef, SolverConfig, solve
from .errors import InvalidParams, NumericalBlowup, UnboundedSublevel
from .observer import invert_class_k


@dataclass(frozen=True)
class DesignInputs:
    eps0b: float
    eps1b: float
    Delta: float
    Delta1: float
    Delta2: float
    alpha02: Callable[[float], float]
    alpha12: Callable[[float], float]
    eps0: float
    eps1: float
    alpha01_inv: Optional[Callable[[float], float]] = None
    alpha11_inv: Optional[Callable[[float], float]] = None
    alpha01: Optional[Callable[[float], float]] = None
    alpha11: Optional[Callable[[float], float]] = None
    provenance: str = "analytic"

    def __post_init__(self):
        for name in ("eps0b", "eps1b", "Delta", "Delta1", "Delta2", "eps0", "eps1"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise InvalidParams(f"{name} must be positive, got {value}")
        if self.alpha01_inv is None and self.alpha01 is None:
            raise InvalidParams("alpha01 or its inverse is required")
        if self.alpha11_inv is None and self.alpha11 is None:
            raise InvalidParams("alpha11 or its inverse is required")

    def a01_inv(self, s):
        return self.alpha01_inv(s) if self.alpha01_inv is not None else invert_class_k(self.alpha01, s)

    def a11_inv(self, s):
        return self.alpha11_inv(s) if self.alpha11_inv is not None else invert_class_k(self.alpha11, s)


def beta_bar(alpha2, eps, s, t):
    return 2.0 * math.exp(-eps * t) * alpha2(s)


def design_step3_lhs(inputs: DesignInputs, eps1a: float, tau_star: float) -> float:
    b0 = beta_bar(inputs.alpha02, inputs.eps0, inputs.Delta2, tau_star)
    reach = inputs.Delta + inputs.a01_inv(inputs.Delta1 + b0)
    b1 = beta_bar(inputs.alpha12, inputs.eps1, reach, tau_star)
    return float(inputs.alpha12(inputs.a11_inv(eps1a + b1)))


def design_step3_check(inputs: DesignInputs, eps1a: float, tau_star: float):
    """Return ``(passed, lhs)`` for the dwell-time condition."""
    if eps1a < 0 or tau_star < 0:
        raise InvalidParams("eps1a and tau_star must be nonnegative")
    lhs = design_step3_lhs(inputs, eps1a, tau_star)
    return lhs <= inputs.eps1b, lhs


def find_dwell_time(inputs: DesignInputs, eps1a: float, tau_grid: Sequence[float]):
    """Smallest ``tau_star`` on an increasing grid passing Step 3, or None."""
    for tau in tau_grid:
        if design_step3_check(inputs, eps1a, tau)[0]:
            return float(tau)
    return None


def sample_sublevel(V, level, center, n, rng, r_max=1e6):
    """Points of the star-shaped sublevel set ``{V <= level}`` around ``center``.

    Each sample picks a random direction, brackets the boundary along that
    ray by doubling and bisection, and returns both the boundary point and a
    point uniformly placed in radius inside it.
    """
    center = np.asarray(center, dtype=float)
    if V(center) > level:
        raise UnboundedSublevel("sublevel set does not contain its center")
    dim = center.shape[0]
    pts = [center]
    for _ in range(n):
        u = rng.normal(size=dim)
        u /= np.linalg.norm(u)
        hi = 1e-3
        while V(center + hi * u) <= level:
            hi *= 2.0
            if hi > r_max:
                raise UnboundedSublevel(f"sublevel {level} unbounded along direction {u}")
        lo = 0.0
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            if V(center + mid * u) <= level:
                lo = mid
            else:
                hi = mid
        pts.append(center + lo * u)
        pts.append(center + lo * rng.uniform() ** (1.0 / dim) * u)
    return np.array(pts)


@dataclass
class StepResult:
    passed: bool
    worst_margin: float
    worst_point: Optional[list] = None
    detail: str = ""


def design_step1_check(eps0b, V0, loop0: HybridSystemDef, target_distance, center, n=32,
                       horizon=20.0, tol=1e-2, seed=0, dt=1e-2) -> StepResult:
    """Check by simulation that ``{V0 <= eps0b}`` lies in the local basin.

    ``loop0`` is the closed loop with the local controller, state ``(xi, zeta0)``;
    sampled solutions must end within ``tol`` of the target.
    """
    rng = np.random.default_rng(seed)
    pts = sample_sublevel(V0, eps0b, center, n, rng)
    cfg = SolverConfig(dt=dt, max_t=horizon)
    worst = (math.inf, None)
    for p in pts:
        try:
            arc = solve(loop0, p, cfg)
            margin = tol - target_distance(arc.final_state)
        except NumericalBlowup:
            margin = -math.inf
        if margin < worst[0]:
            worst = (margin, p)
    return StepResult(worst[0] >= 0, float(worst[0]), list(map(float, worst[1])), "basin containment")


def design_step2_check(eps0a, eps0b, eps1b, V0, V1, gamma0, h0, eps0, loop0: HybridSystemDef, center,
                       sample_budget=64, horizon=10.0, seed=0, dt=1e-2) -> StepResult:
    """Check the handoff region and the local observer input bound by sampling.

    Samples ``{V1 <= eps1b}`` (star-shaped around ``center``), requires
    ``V0 <= eps0b`` there, and simulates the local closed loop from each sample
    requiring ``gamma0(|h0(xi)|) < eps0a * eps0`` along the whole solution.
    The worst margin over both checks is reported with where it occurred.
    """
    if not eps0a > 0:
        raise InvalidParams(f"eps0a must be positive, got {eps0a}")
    if not eps0a < eps0b:
        raise InvalidParams(f"eps0a must be below eps0b ({eps0a} >= {eps0b})")
    rng = np.random.default_rng(seed)
    pts = sample_sublevel(V1, eps1b, center, sample_budget, rng)
    cfg = SolverConfig(dt=dt, max_t=horizon)
    cap = eps0a * eps0
    worst = (math.inf, None, "")
    for p in pts:
        m = eps0b - V0(p)
        if m < worst[0]:
            worst = (m, p, "handoff region leaves {V0 <= eps0b}")
        try:
            arc = solve(loop0, p, cfg)
            _, _, xs = arc.stacked()
            peak = max(gamma0(float(np.linalg.norm(np.atleast_1d(h0(x))))) for x in xs)
            m = cap - peak
        except NumericalBlowup:
            m = -math.inf
        if m < worst[0]:
            worst = (m, p, "gamma0(|h0|) reaches eps0a * eps0")
    passed = worst[0] > 0
    return StepResult(passed, float(worst[0]), list(map(float, worst[1])), "" if passed else worst[2])


def estimate_deltas(loop0_obs: HybridSystemDef, z_index: int, target_distance, initial_points, eps0a,
                    horizon=10.0, dt=1e-2):
    """Estimate ``(Delta1, Delta2)`` by simulating the local loop with its observer.

    Each run stops being counted once the observer exceeds ``eps0a`` (where
    the supervisor would hand control back), so ``Delta1 <= eps0a``.
    """
    cfg = SolverConfig(dt=dt, max_t=horizon)
    d1 = d2 = 0.0
    for p in initial_points:
        arc = solve(loop0_obs, p, cfg)
        _, _, xs = arc.stacked()
        for x in xs:
            d2 = max(d2, target_distance(x))
            if x[z_index] >= eps0a:
                d1 = eps0a
                break
            d1 = max(d1, float(x[z_index]))
    return d1, d2


@dataclass
class DesignReport:
    eps0b: float
    eps0a: float
    eps1b: float
    eps1a: float
    tau_star: float
    lhs_step3: float
    passed: bool
    provenance: str
    steps: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def run_design(inputs: DesignInputs, eps0a: float, eps1a: float, tau_star: float, step1=None, step2=None):
    """Assemble a design report; ``step1``/``step2`` are optional StepResults."""
    ok3, lhs = design_step3_check(inputs, eps1a, tau_star)
    steps = {"step3": {"passed": ok3, "lhs": lhs}}
    passed = ok3 and eps0a < inputs.eps0b
    for name, res in (("step1", step1), ("step2", step2)):
        if res is not None:
            steps[name] = asdict(res)
            passed = passed and res.passed
    return DesignReport(inputs.eps0b, eps0a, inputs.eps1b, eps1a, tau_star, lhs, passed, inputs.provenance, steps)
