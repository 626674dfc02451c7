import numpy as np
from hypothesis import given, settings, strategies as st

from hybrid_uniting.arcio import arc_from_csv, arc_from_json, arc_to_csv, arc_to_json, fmt
from hybrid_uniting.core import HybridSystemDef, SolverConfig, solve


def timer_arc(max_t=2.5, dt=0.1):
    sys_ = HybridSystemDef(2, lambda x: np.array([1.0, -x[1]]), lambda x: 1.0 - x[0],
                           lambda x: [np.array([0.0, x[1] + 1.0])], lambda x: x[0] - 1.0)
    return solve(sys_, [0.0, 0.3], SolverConfig(dt=dt, max_t=max_t))


def test_csv_header_and_jump_rows():
    text = arc_to_csv(timer_arc())
    lines = text.splitlines()
    assert lines[0] == "t,j,x0,x1"
    rows = [l.split(",") for l in lines[1:]]
    jumps = [(a, b) for a, b in zip(rows, rows[1:]) if a[1] != b[1]]
    assert len(jumps) == 2
    for a, b in jumps:
        assert a[0] == b[0] and int(b[1]) == int(a[1]) + 1


def test_fmt_has_17_significant_digits():
    assert fmt(0.1) == "0.10000000000000001"


@settings(max_examples=15, deadline=None)
@given(st.floats(0.5, 4.0), st.floats(0.01, 0.3))
def test_round_trips_are_exact(max_t, dt):
    arc = timer_arc(max_t, dt)
    for back in (arc_from_csv(arc_to_csv(arc)), arc_from_json(arc_to_json(arc))):
        assert len(back.intervals) == len(arc.intervals)
        for a, b in zip(arc.intervals, back.intervals):
            assert a.j == b.j
            assert np.array_equal(a.t, b.t) and np.array_equal(a.x, b.x)
    assert arc_from_json(arc_to_json(arc)).termination == arc.termination
