import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybrid_uniting.errors import InvalidConfig
from hybrid_uniting.examples import ex1
from hybrid_uniting.supervisor import SupervisorParams
from hybrid_uniting.verify import ex1_certificate_slack


def test_dynamics_examples():
    a = 0.25
    assert np.array_equal(ex1.ex1_plant_dynamics([0.0, 0.0], [0.0, -a], a), [0.0, 0.0])
    assert np.array_equal(ex1.ex1_plant_dynamics([0.0, a], [a, 0.0], a), [0.0, 0.0])
    assert np.array_equal(ex1.ex1_plant_dynamics([1.0, 1.0], [0.0, 0.0], a), [-2.0, 0.25])


def test_config_bounds():
    for bad in (0.7, 0.0, -0.6, math.sqrt(3) / 3):
        with pytest.raises(InvalidConfig) as err:
            ex1.Example1Config(alpha_bar=bad)
        assert err.value.field == "alpha_bar"
    ex1.Example1Config(alpha_bar=-0.25)
    with pytest.raises(InvalidConfig):
        ex1.Example1Config(q0=3)


def test_scenario_parameters():
    loop_a = ex1.ex1_build()
    assert loop_a.params.eps0a == loop_a.params.eps1a == 0.01 and loop_a.params.tau_star == 1.0
    cfg_c = ex1.Example1Config(sup_params=SupervisorParams(4 / 27, 5e-5, 15.0))
    assert ex1.ex1_build(cfg_c).params.tau_star == 15.0
    assert np.array_equal(loop_a.x0, [3.0, -3.0, 0.0, 1.0, 1.0, 0.0])


def test_basin_margin():
    assert ex1.V0(np.array([0.0, 0.25])) == 0.03125 < 1 / 6


def test_certificates_on_samples():
    s0, s1 = ex1_certificate_slack(n=100_000)
    assert s0 <= 1e-9 and s1 <= 1e-9


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 50))
def test_global_envelopes(s):
    # alpha11 <= V1 <= alpha12 with r = |xi - (0, alpha_bar)| along the axes
    assert ex1.alpha11(ex1.alpha11_inv(s)) == pytest.approx(s, rel=1e-9, abs=1e-12)
    V1 = ex1.make_V1(0.25)
    for xi in ([s, 0.25], [0.0, 0.25 + s], [s / math.sqrt(2), 0.25 + s / math.sqrt(2)]):
        v = V1(np.array(xi))
        assert ex1.alpha11(s) <= v * (1 + 1e-12) + 1e-15
        assert v <= ex1.alpha12(s) * (1 + 1e-12) + 1e-15


def test_observer_gains():
    obs0, obs1 = ex1.ex1_observers(0.25)
    assert obs0.eps == obs1.eps == 1.0
    assert obs0.gamma(1.0) == 2.0 and obs1.gamma(5.0) == 0.0
    assert ex1.half_square_inv(ex1.half_square(3.0)) == pytest.approx(3.0)
