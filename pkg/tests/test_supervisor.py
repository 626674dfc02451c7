import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybrid_uniting.core import HybridArc, ArcInterval, Termination
from hybrid_uniting.errors import DimensionMismatch, InvalidParams
from hybrid_uniting.examples import ex1, ex2
from hybrid_uniting.scenario import preset_config, run
from hybrid_uniting.supervisor import (SupervisedLayout, SupervisedState, SupervisorParams, phases,
                                       supervisor_guards, switching_census)


def ex1_loop(eps0a=0.01, eps1a=0.01, tau_star=1.0):
    return ex1.ex1_build(ex1.Example1Config(sup_params=SupervisorParams(eps0a, eps1a, tau_star)))


def state(loop, xi=(0.5, 0.5), z0=0.0, z1=0.0, q=1, tau=0.0):
    return loop.layout.pack(SupervisedState(np.array(xi), np.zeros(0), np.zeros(0), z0, z1, q, tau))


def test_handoff_jump_set_and_reset():
    loop = ex1_loop()
    x = state(loop, z1=0.005, q=1, tau=1.2)
    _, _, _, d_a, d_b = supervisor_guards(x, loop.layout, loop.params, loop.K0, loop.K1)
    assert d_b >= 0 and d_a < 0
    assert loop.system.jump_guard(x) >= 0
    (nxt,) = loop.system.jump_map(x)
    s = loop.layout.unpack(nxt)
    assert (s.q, s.tau, s.z0, s.z1) == (0, 0.0, 0.0, 0.0)
    assert np.array_equal(s.xi, x[:2])


def test_return_jump_set():
    loop = ex1_loop()
    x = state(loop, z0=0.11, z1=0.0, q=0, tau=0.0)
    _, _, _, d_a, _ = supervisor_guards(x, loop.layout, loop.params, loop.K0, loop.K1)
    assert d_a >= 0
    (nxt,) = loop.system.jump_map(x)
    assert loop.layout.unpack(nxt).q == 1


def test_global_flow_set_before_threshold():
    loop = ex1_loop()
    x = state(loop, z1=0.5, q=1, tau=3.0)
    _, c_b, _, _, d_b = supervisor_guards(x, loop.layout, loop.params, loop.K0, loop.K1)
    assert c_b >= 0 and d_b < 0
    assert loop.system.flow_guard(x) >= 0
    assert loop.system.flow(x)[loop.layout.tau] == 1.0


def test_dwell_blocks_early_handoff():
    loop = ex1_loop()
    x = state(loop, z1=0.005, q=1, tau=0.5)
    _, _, c_c, _, d_b = supervisor_guards(x, loop.layout, loop.params, loop.K0, loop.K1)
    assert c_c >= 0 and d_b < 0


def test_params_validated():
    for bad in [(0.0, 1, 1), (1, -1, 1), (1, 1, 0), (1, 1, math.inf)]:
        with pytest.raises(InvalidParams):
            SupervisorParams(*bad)
    with pytest.raises(InvalidParams):
        SupervisedState(np.zeros(2), np.zeros(0), np.zeros(0), q=2)
    with pytest.raises(InvalidParams):
        SupervisedState(np.zeros(2), np.zeros(0), np.zeros(0), z1=-1.0)


def test_mismatched_controllers_rejected():
    cfg = ex2.Example2Config()
    from hybrid_uniting.supervisor import build_supervised_system
    obs0, obs1 = ex2.ex2_observers(cfg)
    with pytest.raises(DimensionMismatch):
        build_supervised_system(ex2.ex2_plant(cfg), ex2.ex2_local_controller(cfg), ex2.ex2_global_controller(cfg),
                                obs0, obs1, SupervisorParams(1, 1, 1))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=2, max_size=2), st.lists(st.floats(-10, 10), min_size=1, max_size=1),
       st.floats(0, 5), st.floats(0, 5), st.integers(0, 1), st.floats(0, 20))
def test_pack_unpack_round_trip(xi, zeta, z0, z1, q, tau):
    lay = SupervisedLayout(2, 1)
    s = SupervisedState(np.array(xi), np.array(zeta), np.array(zeta) * 2, z0, z1, q, tau)
    back = lay.unpack(lay.pack(s))
    assert np.array_equal(back.xi, s.xi) and np.array_equal(back.zeta1, s.zeta1)
    assert (back.z0, back.z1, back.q, back.tau) == (z0, z1, q, tau)
    assert lay.columns() == ["xi0", "xi1", "zeta0_0", "zeta1_0", "z0", "z1", "q", "tau"]


@pytest.fixture(scope="module")
def figB():
    return run(preset_config("ex1-figB"))


@pytest.fixture(scope="module")
def ex2_below():
    return run(preset_config("ex2-below"))


def test_census_figA():
    res = run(preset_config("ex1-figA"))
    c = switching_census(res.arc, res.loop.layout)
    assert (c.count_0to1, c.count_1to0) == (0, 1)
    assert c.min_dwell_t == math.inf


def test_census_figB_dwell(figB):
    c = switching_census(figB.arc, figB.loop.layout)
    assert c.count_0to1 >= 1
    assert c.min_dwell_t >= 1.0 - 1e-6
    assert figB.arc.termination == Termination.CONVERGED


def test_census_without_switches():
    lay = SupervisedLayout(2, 0)
    x = np.tile([1.0, 1.0, 0.0, 0.0, 1.0, 0.0], (3, 1))
    arc = HybridArc([ArcInterval(0, np.array([0.0, 0.1, 0.2]), x)], Termination.HORIZON_T, 6)
    c = switching_census(arc, lay)
    assert (c.count_0to1, c.count_1to0, c.min_dwell_t) == (0, 0, math.inf)


@pytest.mark.parametrize("fixture", ["figB", "ex2_below"])
def test_gating_and_reset_contract(fixture, request):
    res = request.getfixturevalue(fixture)
    lay = res.loop.layout
    for iv in res.arc.intervals:
        q = int(round(iv.x[0, lay.q]))
        frozen = [lay.z0] + list(range(lay.dim)[lay.zeta0]) if q == 1 else \
            [lay.z1, lay.tau] + list(range(lay.dim)[lay.zeta1])
        for k in frozen:
            assert np.all(iv.x[:, k] == iv.x[0, k])
    for _, _, pre, post in res.arc.jump_pairs():
        if int(round(pre[lay.q])) != int(round(post[lay.q])):
            assert post[lay.z0] == post[lay.z1] == post[lay.tau] == 0.0
            assert np.array_equal(pre[lay.xi], post[lay.xi])


def test_phases_split_by_mode(figB):
    ph = phases(figB.arc, figB.loop.layout)
    assert all(a.q != b.q for a, b in zip(ph, ph[1:]))
    assert ph[-1].q == 0
