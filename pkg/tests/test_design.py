import math

import pytest
from hypothesis import given, settings, strategies as st

from hybrid_uniting.design import (DesignInputs, design_step2_check, design_step3_check, design_step3_lhs,
                                   find_dwell_time, run_design)
from hybrid_uniting.errors import InvalidParams
from hybrid_uniting.examples import ex1

# value of the dwell-time condition for the analytic Example-1 inputs at
# (eps1a, tau_star) = (5e-5, 15); frozen from the independent evaluation below
LHS_FIG_C = 0.014379026619305629


def lhs_by_hand(eps1a, tau):
    d1 = 4.0 / 27.0
    d2 = math.sqrt(2.0 * (d1 + 2.0 * 0.5 * (10.0 + d1) ** 2))
    b0 = 2.0 * math.exp(-tau) * 0.5 * d2 ** 2
    reach = 0.25 + math.sqrt(2.0 * (d1 + b0))
    b1 = 2.0 * math.exp(-tau) * (0.25 * reach ** 4 + 0.5 * reach ** 2)
    s = eps1a + b1
    r = 2.0 * max(s ** 0.25, s ** 0.5)
    return 0.25 * r ** 4 + 0.5 * r ** 2


@pytest.fixture(scope="module")
def inputs():
    return ex1.ex1_design_inputs()


def test_step3_passes_at_designed_values(inputs):
    ok, lhs = design_step3_check(inputs, 5e-5, 15.0)
    assert ok
    assert lhs == pytest.approx(lhs_by_hand(5e-5, 15.0), rel=1e-12)
    assert lhs == pytest.approx(LHS_FIG_C, rel=1e-12)
    assert lhs <= 0.015


def test_step3_fails_with_short_dwell(inputs):
    ok, lhs = design_step3_check(inputs, 5e-5, 1.0)
    assert not ok
    assert lhs == pytest.approx(lhs_by_hand(5e-5, 1.0), rel=1e-12)
    assert lhs == pytest.approx(87124334.1, rel=1e-8)


def test_step3_limit_case(inputs):
    ok, lhs = design_step3_check(inputs, 0.0, 1e4)
    assert ok and lhs == 0.0


def test_step3_rejects_negative(inputs):
    with pytest.raises(InvalidParams):
        design_step3_check(inputs, -1.0, 1.0)


def test_find_dwell_time(inputs):
    tau = find_dwell_time(inputs, 5e-5, [1, 5, 10, 15, 20])
    assert tau is not None and tau <= 15
    assert find_dwell_time(inputs, 1.0, [1, 5, 10, 100, 1e4]) is None
    assert find_dwell_time(inputs, 5e-5, []) is None


def test_inputs_validated():
    with pytest.raises(InvalidParams):
        DesignInputs(1, 1, 1, 1, 0.0, abs, abs, 1, 1, alpha01=abs, alpha11=abs)
    with pytest.raises(InvalidParams):
        DesignInputs(1, 1, 1, 1, 1, abs, abs, 1, 1)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-6, 1e-2), st.floats(0.0, 1e-2), st.floats(1.0, 30.0), st.floats(0.0, 10.0))
def test_step3_monotone(eps1a, de, tau, dt):
    inp = ex1.ex1_design_inputs()
    assert design_step3_lhs(inp, eps1a, tau + dt) <= design_step3_lhs(inp, eps1a, tau) * (1 + 1e-12)
    assert design_step3_lhs(inp, eps1a + de, tau) >= design_step3_lhs(inp, eps1a, tau) * (1 - 1e-12)


def step2(eps0a=4.0 / 27.0, eps1b=0.015):
    return design_step2_check(eps0a, 1.0 / 6.0, eps1b, ex1.V0, ex1.make_V1(0.25), ex1.gamma0, lambda xi: xi[0], 1.0,
                              ex1.ex1_local_loop(0.25), (0.0, 0.25), sample_budget=12, horizon=8.0)


def test_step2_example_values_pass():
    res = step2()
    assert res.passed and res.worst_margin > 0


def test_step2_large_sublevel_fails():
    res = step2(eps1b=10.0)
    assert not res.passed
    assert res.worst_point is not None


def test_step2_precondition():
    with pytest.raises(InvalidParams):
        step2(eps0a=0.0)


def test_report_json(inputs):
    doc = run_design(inputs, 4.0 / 27.0, 5e-5, 15.0).to_json()
    assert doc["pass"] is True
    assert set(doc) >= {"eps0b", "eps0a", "eps1b", "eps1a", "tau_star", "lhs_step3", "pass", "provenance"}
    assert doc["provenance"] == "analytic"
    assert run_design(inputs, 4.0 / 27.0, 5e-5, 1.0).to_json()["pass"] is False
