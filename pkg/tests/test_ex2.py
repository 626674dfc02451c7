import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybrid_uniting.errors import DomainError, InvalidConfig
from hybrid_uniting.examples import ex2

CFG = ex2.Example2Config()


def test_barrier_examples():
    assert ex2.ex2_barrier(1.0) == 0.0 and ex2.ex2_barrier(2.0) == 0.0
    assert ex2.ex2_barrier(0.5) == pytest.approx(0.25 * math.log(2.0), rel=1e-14)
    assert ex2.ex2_barrier(0.5) == pytest.approx(0.17329, abs=1e-5)
    assert ex2.ex2_barrier_deriv(1.0) == 0.0
    for bad in (0.0, -1.0):
        with pytest.raises(DomainError):
            ex2.ex2_barrier(bad)
        with pytest.raises(DomainError):
            ex2.ex2_barrier_deriv(bad)


@pytest.mark.parametrize("z", [0.3, 0.9, 1.0, 1.5])
def test_barrier_derivative(z):
    h = 1e-4
    fd = (ex2.ex2_barrier(z + h) - ex2.ex2_barrier(z - h)) / (2 * h)
    assert abs(ex2.ex2_barrier_deriv(z) - fd) <= 1e-5


def test_defaults_and_derived_constants():
    assert CFG.xi_star == (4.0, -0.25) and CFG.xi_circ == (3.0, 0.0)
    assert CFG.gamma_prime == pytest.approx(1 / 1.01) and CFG.gamma_prime == pytest.approx(0.9901, abs=1e-4)
    assert CFG.eps1 == pytest.approx(0.0099, abs=1e-4)
    loop = ex2.ex2_build(CFG)
    assert loop.K0.target_distance(np.array([4.0, -0.25])) == 0.0
    assert loop.K1.target_distance(np.array([3.0, 0.0])) == 0.0


def test_config_bounds():
    with pytest.raises(InvalidConfig) as err:
        ex2.Example2Config(lam=0.2)
    assert err.value.field == "lam"
    for kw in ({"mu": 1.0}, {"alpha_hat": 0.0}, {"zeta1_0": 3}):
        with pytest.raises(InvalidConfig):
            ex2.Example2Config(**kw)


@pytest.mark.parametrize("mode", [1, 2])
def test_potential_vanishes_at_intermediate_point(mode):
    d, _ = ex2.ex2_clearance(np.array(CFG.xi_circ), mode, CFG)
    assert d >= 1.0
    phi, g = ex2.ex2_potential(np.array(CFG.xi_circ), mode, CFG)
    assert phi == 0.0 and np.array_equal(g, [0.0, 0.0])


def test_potential_is_quadratic_far_from_obstacle():
    for xi in ([5.0, 2.0], [3.5, -1.0], [-1.0, 3.0]):
        for mode in (1, 2):
            d, _ = ex2.ex2_clearance(np.array(xi), mode, CFG)
            if d >= 1.0:
                phi, _ = ex2.ex2_potential(np.array(xi), mode, CFG)
                assert phi == pytest.approx(0.5 * ((xi[0] - 3) ** 2 + xi[1] ** 2), rel=1e-14)


def test_potential_domain_error_inside_obstacle():
    with pytest.raises(DomainError):
        ex2.ex2_potential(np.array([1.0, 0.0]), 1, CFG)


def test_potential_gradient_on_random_points():
    rng = np.random.default_rng(7)
    count, h = 0, 1e-6
    while count < 100:
        xi = rng.uniform([-1.0, -2.0], [5.0, 2.0])
        mode = int(rng.integers(1, 3))
        d, _ = ex2.ex2_clearance(xi, mode, CFG)
        if not 0.2 < d < 3.0:
            continue
        count += 1
        _, g = ex2.ex2_potential(xi, mode, CFG)
        fd = [(ex2.ex2_potential(xi + e, mode, CFG)[0] - ex2.ex2_potential(xi - e, mode, CFG)[0]) / (2 * h)
              for e in (np.array([h, 0.0]), np.array([0.0, h]))]
        assert np.max(np.abs(g - fd)) <= 1e-5 * max(1.0, np.max(np.abs(g)))


def test_hysteresis_examples():
    assert ex2._successors({1: 10.0, 2: 1.0}, 1, 1.01) == [2]
    assert ex2._successors({1: 3.0, 2: 3.0}, 1, 1.01) == []  # equal potentials are outside the jump set
    assert ex2._successors({1: 3.0, 2: 3.0}, 1, 1.0) == [1, 2]
    assert ex2._successors({1: 3.0, 2: 3.0}, 2, 1.0) == [2, 1]


@settings(max_examples=200, deadline=None)
@given(st.floats(-1, 5), st.floats(-2, 2), st.sampled_from([1, 2]))
def test_hysteresis_jump_decreases_potential(x1, x2, zeta):
    y = ex2.ex2_output(np.array([x1, x2]), CFG)
    phi = ex2._phis(y)
    ratio = CFG.mu - CFG.lam
    if not math.isfinite(phi[zeta]) or phi[zeta] < ratio * min(phi.values()):
        return  # not in the jump set
    succ = ex2.ex2_hysteresis_jump(np.array([x1, x2]), zeta, CFG)
    assert succ
    for k in succ:
        assert phi[k] <= CFG.gamma_prime * phi[zeta] * (1 + 1e-12)


def test_wedge_regions_miss_the_upper_start():
    assert ex2.wedge_region((0.0, -2.0), 1)
    assert not ex2.wedge_region((0.0, 0.0), 2)
