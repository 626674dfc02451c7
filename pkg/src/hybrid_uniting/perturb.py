"""Disturbed plants and inflated hybrid systems for robustness experiments.

``perturb_plant`` adds actuator error ``d1``, unmodeled dynamics ``d2`` and
measurement noise ``d3, d4`` on the two outputs:

    xi' = f_p(xi, u + d1(t)) + d2(t),   y_0 = h_0(xi) + d3(t),   y_1 = h_1(xi) + d4(t).

Ordinary time is appended as the last plant coordinate so the disturbed
plant stays autonomous. ``inflate_system`` relaxes every guard by
``delta * L`` with ``L`` a sampled Lipschitz constant of that guard, which
approximates the ``delta``-inflation of the flow and jump sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .composer import Plant
from .core import HybridSystemDef
from .errors import DimensionMismatch, DisturbanceBoundError, InvalidConfig

KINDS = ("zero", "constant", "sinusoid", "noise")


@dataclass
class Signal:
    """Bounded signal of ordinary time.

    ``noise`` draws a fresh value in the cube of half-width ``bound / sqrt(dim)``
    at the start of every ``hold``-long interval, from a generator seeded by
    ``(seed, interval index)`` so values do not depend on evaluation order.
    """

    kind: str = "zero"
    bound: float = 0.0
    dim: int = 1
    value: Optional[tuple] = None
    amplitude: Optional[tuple] = None
    frequency: float = 1.0
    seed: int = 0
    hold: float = 0.05
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidConfig(f"unknown disturbance kind {self.kind!r}", field="kind")
        if self.bound < 0 or not math.isfinite(self.bound):
            raise InvalidConfig(f"disturbance bound must be finite and nonnegative, got {self.bound}", field="bound")
        if self.kind == "constant":
            self._check(np.asarray(self.value, dtype=float), "value")
        if self.kind == "sinusoid":
            self._check(np.asarray(self.amplitude, dtype=float), "amplitude")
        if self.kind == "noise" and not self.hold > 0:
            raise InvalidConfig("noise hold must be positive", field="hold")

    def _check(self, v, name):
        if v.shape != (self.dim,):
            raise DimensionMismatch(f"{name} has shape {v.shape}, expected ({self.dim},)")
        if np.linalg.norm(v) > self.bound * (1 + 1e-12):
            raise DisturbanceBoundError(f"|{name}| = {np.linalg.norm(v):.6g} exceeds bound {self.bound}")

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    def __call__(self, t: float) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros(self.dim)
        if self.kind == "constant":
            return np.asarray(self.value, dtype=float)
        if self.kind == "sinusoid":
            return np.asarray(self.amplitude, dtype=float) * math.sin(2.0 * math.pi * self.frequency * t)
        k = int(math.floor(t / self.hold))
        v = self._cache.get(k)
        if v is None:
            rng = np.random.default_rng((self.seed, k))
            v = rng.uniform(-1.0, 1.0, self.dim) * (self.bound / math.sqrt(self.dim))
            if len(self._cache) > 100_000:
                self._cache.clear()
            self._cache[k] = v
        return v

    def to_dict(self) -> dict:
        return {"kind": self.kind, "bound": self.bound, "dim": self.dim, "value": self.value,
                "amplitude": self.amplitude, "frequency": self.frequency, "seed": self.seed, "hold": self.hold}


@dataclass
class DisturbanceProfile:
    """Actuator error ``d1``, unmodeled dynamics ``d2`` and output noise ``d3, d4``.

    Missing entries are zero signals of the right dimension.
    """

    d1: Optional[Signal] = None
    d2: Optional[Signal] = None
    d3: Optional[Signal] = None
    d4: Optional[Signal] = None

    @classmethod
    def noise(cls, delta, plant: Plant, seed=0, hold=0.05):
        dims = _dims(plant)
        sig = [Signal("noise", delta, n, seed=seed * 4 + k, hold=hold) for k, n in enumerate(dims)]
        return cls(*sig)

    def signals(self):
        return (self.d1, self.d2, self.d3, self.d4)

    def check(self, times) -> float:
        """Largest ``|d_i(t)| - bound_i`` on ``times``; raises if positive."""
        worst = -math.inf
        for s in self.signals():
            if s is None:
                continue
            for t in times:
                excess = float(np.linalg.norm(s(t))) - s.bound
                worst = max(worst, excess)
                if excess > 1e-12:
                    raise DisturbanceBoundError(f"|d(t={t})| exceeds bound {s.bound}")
        return worst


def _dims(plant: Plant):
    probe = np.zeros(plant.n_p)
    return (plant.m_p, plant.n_p, plant.output(0, probe).shape[0], plant.output(1, probe).shape[0])


def perturb_plant(plant: Plant, profile: DisturbanceProfile) -> Plant:
    """Disturbed plant with ordinary time appended as state ``n_p``."""
    dims = _dims(plant)
    sig = []
    for k, (s, n) in enumerate(zip(profile.signals(), dims)):
        if s is None:
            s = Signal("zero", 0.0, n)
        if s.dim != n:
            raise DimensionMismatch(f"d{k + 1} has dimension {s.dim}, expected {n}")
        sig.append(s)
    d1, d2, d3, d4 = sig
    n = plant.n_p

    def f_p(x, u):
        xi, t = x[:n], x[n]
        if not d1.is_zero:
            u = np.asarray(u, dtype=float) + d1(t)
        dxi = np.asarray(plant.f_p(xi, u), dtype=float)
        if not d2.is_zero:
            dxi = dxi + d2(t)
        return np.append(dxi, 1.0)

    def noisy(i, d):
        h = plant.outputs[i]
        if d.is_zero:
            return lambda x: h(x[:n])
        return lambda x: np.atleast_1d(np.asarray(h(x[:n]), dtype=float)) + d(x[n])

    return Plant(n_p=n + 1, f_p=f_p, outputs=(noisy(0, d3), noisy(1, d4)), m_p=plant.m_p,
                 name=f"{plant.name} (disturbed)")


def lipschitz_estimate(fn: Callable, points, rng, radius=1e-3, pairs_per_point=4) -> float:
    """Largest finite difference quotient of ``fn`` over random nearby pairs."""
    L = 0.0
    for p in points:
        p = np.asarray(p, dtype=float)
        gp = fn(p)
        if not math.isfinite(gp):
            continue
        for _ in range(pairs_per_point):
            step = rng.normal(size=p.shape[0])
            step *= radius / np.linalg.norm(step)
            gq = fn(p + step)
            if math.isfinite(gq):
                L = max(L, abs(gq - gp) / radius)
    return L


def guard_lipschitz(system: HybridSystemDef, points, rng=None):
    """Sampled Lipschitz constants ``(L_flow, L_jump)`` of the two guards."""
    rng = rng or np.random.default_rng(0)
    return lipschitz_estimate(system.flow_guard, points, rng), lipschitz_estimate(system.jump_guard, points, rng)


def inflate_system(system: HybridSystemDef, delta: float, points=None, rng=None,
                   offset: Optional[Callable] = None, L_flow=None, L_jump=None) -> HybridSystemDef:
    """System whose guards are relaxed by ``delta`` times their Lipschitz estimate.

    ``points`` are where the Lipschitz constants are sampled (for instance the
    samples of a nominal arc); ``L_flow``/``L_jump`` override the estimates.
    ``offset(x)`` adds a perturbation of norm at most ``delta`` to every
    jump successor.
    """
    if delta < 0:
        raise InvalidConfig(f"delta must be nonnegative, got {delta}", field="delta")
    rng = rng or np.random.default_rng(0)
    if points is None:
        points = rng.normal(size=(256, system.dim))
    if L_flow is None or L_jump is None:
        est = guard_lipschitz(system, points, rng)
        L_flow = est[0] if L_flow is None else L_flow
        L_jump = est[1] if L_jump is None else L_jump
    fl, jl = delta * L_flow, delta * L_jump

    def jump_map(x):
        out = system.jump_map(x)
        if offset is None:
            return out
        moved = []
        for g in out:
            w = np.asarray(offset(x), dtype=float)
            if np.linalg.norm(w) > delta * (1 + 1e-12):
                raise DisturbanceBoundError(f"jump offset of norm {np.linalg.norm(w):.3g} exceeds delta = {delta}")
            moved.append(np.asarray(g, dtype=float) + w)
        return moved

    return HybridSystemDef(
        dim=system.dim,
        flow=system.flow,
        flow_guard=lambda x: system.flow_guard(x) + fl,
        jump_map=jump_map,
        jump_guard=lambda x: system.jump_guard(x) + jl,
        output=system.output,
        converged=system.converged,
        name=f"{system.name} (inflated by {delta:g})",
    )
