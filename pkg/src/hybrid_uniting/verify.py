"""Property suites: Lyapunov certificates, observer bounds, dwell time, avoidance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import solve
from .examples import ex1, ex2
from .scenario import preset_config, run, solver_config
from .supervisor import _mode, switching_census


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def row(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<34} value={self.value:.6g}  threshold={self.threshold:.6g}  {self.detail}"


def ex1_certificate_slack(alpha_bar=0.25, n=100_000, box=5.0, seed=0):
    """Largest violation of the two flow inequalities on uniform samples of the box.

    Returns ``(slack0, slack1)`` with
    ``slack0 = max(<grad V0, f(xi, kappa0)> + V0 - xi1^4 (1 + xi1^2))`` and
    ``slack1 = max(<grad V1, f(xi, kappa1)> + V1)``.
    """
    rng = np.random.default_rng(seed)
    x1, x2 = rng.uniform(-box, box, (2, n))
    a = alpha_bar
    # local controller u = (0, -a)
    f1 = -x1 - x2 * x1 * x1
    f2 = -x2 + x1 * x1
    v0 = 0.5 * (x1 * x1 + x2 * x2)
    s0 = x1 * f1 + x2 * f2 + v0 - x1 ** 4 * (1.0 + x1 * x1)
    # global controller u = (xi2, 0)
    g1 = -x1
    g2 = -x2 + x1 * x1 + a
    e = x2 - a
    v1 = 0.25 * x1 ** 4 + 0.5 * e * e
    s1 = x1 ** 3 * g1 + e * g2 + v1
    return float(s0.max()), float(s1.max())


def suite_ex1_certificates(n=100_000, tol=1e-9, **_):
    s0, s1 = ex1_certificate_slack(n=n)
    basin = ex1.V0(np.array([0.0, 0.25]))
    return [
        CheckResult("ex1 V0 flow inequality", s0 <= tol, s0, tol, f"{n} samples in [-5,5]^2"),
        CheckResult("ex1 V1 flow decrease", s1 <= tol, s1, tol, f"{n} samples in [-5,5]^2"),
        CheckResult("ex1 A1 inside {V0 <= 1/6}", basin < 1.0 / 6.0, basin, 1.0 / 6.0),
    ]


def observer_margin(preset: str) -> float:
    res = run(preset_config(preset))
    worst = -math.inf
    for _, _, _, m in res.loop.observer_margins(res.arc):
        worst = max(worst, float(m.max()))
    return worst


def suite_observer_bounds(preset=None, tol=1e-3, **_):
    presets = [preset] if preset else ["ex1-figA", "ex1-figC"]
    out = []
    for p in presets:
        m = observer_margin(p)
        out.append(CheckResult(f"observer bound on {p}", m <= tol, m, tol, "max V - z - beta"))
    return out


def suite_dwell_time(preset="ex1-figB", **_):
    res = run(preset_config(preset or "ex1-figB"))
    census = switching_census(res.arc, res.loop.layout)
    tau = res.loop.params.tau_star
    ok = census.min_dwell_t >= tau - 1e-6 and res.arc.termination.value == "Converged"
    return [CheckResult(f"dwell between 1->0 switches ({preset or 'ex1-figB'})", ok, census.min_dwell_t, tau,
                        f"{census.total} switches, {res.arc.termination.value}")]


def ex2_arcs(extra=True):
    """Simulated supervised arcs of both routes (and a start that forces a
    hysteresis jump)."""
    out = []
    for name in ("ex2-below", "ex2-above"):
        res = run(preset_config(name))
        out.append((name, res.loop, res.arc))
    if extra:
        cfg = ex2.Example2Config(zeta1_0=2, xi0=(0.0, -0.01))
        loop = ex2.ex2_build(cfg, "ex2-hysteresis")
        sc = preset_config("ex2-below")
        sc.solver["max_t"] = 8.0
        out.append(("ex2-hysteresis", loop, solve(loop.system, loop.x0, solver_config(sc))))
    return out


def ex2_flow_slack(loop, arc, cfg=None):
    """Largest ``-|grad phi|^2 + 2 phi`` over the q = 1 samples (the rate of
    ``phi_zeta`` along the gradient flow is ``-|grad phi|^2``)."""
    cfg = cfg or ex2.Example2Config()
    lay = loop.layout
    worst = -math.inf
    for _, _, x in arc.samples():
        if _mode(x, lay) != 1:
            continue
        phi, g = ex2.ex2_potential(x[lay.xi], ex2._mode_of(x[lay.zeta1]), cfg)
        worst = max(worst, 2.0 * phi - float(g @ g))
    return worst


def ex2_jump_ratios(loop, arc, cfg=None):
    """``phi_after / phi_before`` at every controller (hysteresis) jump."""
    cfg = cfg or ex2.Example2Config()
    lay = loop.layout
    out = []
    for _, _, pre, post in arc.jump_pairs():
        if _mode(pre, lay) != 1 or _mode(post, lay) != 1:
            continue
        xi = pre[lay.xi]
        before, _ = ex2.ex2_potential(xi, ex2._mode_of(pre[lay.zeta1]), cfg)
        after, _ = ex2.ex2_potential(xi, ex2._mode_of(post[lay.zeta1]), cfg)
        out.append(after / before)
    return out


def suite_ex2_certificates(**_):
    cfg = ex2.Example2Config()
    flow, ratios = -math.inf, []
    for _, loop, arc in ex2_arcs():
        flow = max(flow, ex2_flow_slack(loop, arc, cfg))
        ratios += ex2_jump_ratios(loop, arc, cfg)
    worst = max(ratios) if ratios else 0.0
    return [
        CheckResult("ex2 flow decrease", flow <= 1e-6, flow, 1e-6, "max 2 phi - |grad phi|^2"),
        CheckResult("ex2 jump decrease", bool(ratios) and worst <= cfg.gamma_prime, worst, cfg.gamma_prime,
                    f"{len(ratios)} hysteresis jumps"),
    ]


def suite_ex2_avoidance(**_):
    cfg = ex2.Example2Config()
    out = []
    for name, loop, arc in ex2_arcs(extra=False):
        _, _, xs = arc.stacked()
        gap = float(np.min(np.hypot(xs[:, 0] - cfg.xi_bar[0], xs[:, 1] - cfg.xi_bar[1])))
        out.append(CheckResult(f"{name} min |xi - xi_bar|", gap >= cfg.alpha_hat, gap, cfg.alpha_hat))
    return out


def region_audit():
    """Fraction of each route's samples inside its wedge routing region."""
    rows = []
    for name, loop, arc in ex2_arcs(extra=False):
        _, _, xs = arc.stacked()
        mode = 1 if name.endswith("below") else 2
        inside = np.mean([ex2.wedge_region(x, mode) for x in xs[:, :2]])
        rows.append((name, mode, float(inside)))
    return rows


SUITES = {
    "ex1-certificates": suite_ex1_certificates,
    "observer-bounds": suite_observer_bounds,
    "dwell-time": suite_dwell_time,
    "ex2-certificates": suite_ex2_certificates,
    "ex2-avoidance": suite_ex2_avoidance,
}


def run_suite(name: str, preset=None):
    if name == "all":
        out = []
        for key, fn in SUITES.items():
            out += fn(preset=None) if key in ("observer-bounds",) else fn()
        return out
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](preset=preset) if preset is not None else SUITES[name]()
