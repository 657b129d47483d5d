import numpy as np
import pytest
from hypothesis import given, strategies as st

from gptctx.core import make_simplex, state_distance
from gptctx.optimize.lp import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LinearProgram,
    LpBuilder,
    solve_lp,
)


def test_minimize_x_with_lower_bound():
    b = LpBuilder()
    x = b.variables(1, lb=-np.inf)
    b.add_ge([([1.0], x)], 1.0)
    b.objective([1.0], x)
    res = b.solve()
    assert res.status == OPTIMAL
    assert res.value == pytest.approx(1.0)


def test_contradictory_bounds_are_infeasible():
    b = LpBuilder()
    x = b.variables(1, lb=-np.inf)
    b.add_ge([([1.0], x)], 1.0)
    b.add_le([([1.0], x)], 0.0)
    res = b.solve()
    assert res.status == INFEASIBLE
    assert not res.ok


def test_unbounded_detected():
    b = LpBuilder()
    x = b.variables(1, lb=-np.inf)
    b.objective([1.0], x)
    assert b.solve().status == UNBOUNDED


def test_simplex_centre_membership_residual_zero():
    assert state_distance(make_simplex(4), np.full(4, 0.25)) == pytest.approx(0.0, abs=1e-12)


def test_dimension_checks():
    with pytest.raises(ValueError):
        LinearProgram(c=[1.0, 1.0], A_eq=np.ones((1, 3)), b_eq=[1.0])
    with pytest.raises(ValueError):
        LinearProgram(c=[1.0], A_ineq=np.ones((1, 1)), b_ineq=[1.0], ineq_sense=["=="])


def test_deterministic():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(4, 6))
    lp = LinearProgram(c=rng.uniform(size=6), A_ineq=A, b_ineq=np.ones(4), ineq_sense=["<="] * 4,
                       ub=np.ones(6))
    first, second = solve_lp(lp), solve_lp(lp)
    assert first.value == second.value
    assert np.array_equal(first.x, second.x)


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.floats(0.1, 10))
def test_box_lp_solution_feasible(c, cap):
    b = LpBuilder()
    x = b.variables(3, ub=cap)
    b.add_le([(np.ones(3), x)], cap)
    b.objective(np.array(c), x)
    res = b.solve()
    assert res.status == OPTIMAL
    assert np.all(res.x >= -1e-7) and np.all(res.x <= cap + 1e-7)
    assert res.x.sum() <= cap + 1e-7
    assert res.value <= 1e-9   # x = 0 is feasible
