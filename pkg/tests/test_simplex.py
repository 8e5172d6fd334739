import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heislab.rng import Rng
from heislab.simplex import solve_lp


def test_basic_min():
    # min -x - y  s.t. x <= 1, y <= 1, x,y >= 0
    res = solve_lp([-1, -1], [[1, 0], [0, 1]], [1, 1], "<=" * 0 or ["<=", "<="])
    assert res.status == "optimal"
    assert res.objective == pytest.approx(-2.0)
    assert res.x == pytest.approx([1.0, 1.0])


def test_equality_and_ge():
    # min x + 2y  s.t. x + y = 3, x - y >= 1
    res = solve_lp([1, 2], [[1, 1], [1, -1]], [3, 1], ["=", ">="])
    assert res.status == "optimal"
    assert res.x == pytest.approx([3.0, 0.0])


def test_infeasible():
    res = solve_lp([1], [[1], [1]], [2, 1], [">=", "<="])
    assert res.status == "infeasible"


def test_unbounded():
    res = solve_lp([-1], [[1]], [1], [">="])
    assert res.status == "unbounded"


def test_negative_rhs_row():
    # x >= 0.5 written as -x <= -0.5
    res = solve_lp([1], [[-1]], [-0.5], ["<="])
    assert res.status == "optimal"
    assert res.x[0] == pytest.approx(0.5)


def test_duality_and_signs():
    c = [3.0, 5.0]
    A = [[1.0, 2.0], [2.0, 1.0], [1.0, 1.0]]
    b = [4.0, 4.0, 5.0]
    senses = [">=", ">=", "<="]
    res = solve_lp(c, A, b, senses)
    assert res.status == "optimal"
    y = res.duals
    assert y[0] >= -1e-9 and y[1] >= -1e-9  # >= rows
    assert y[2] <= 1e-9  # <= rows
    assert float(np.dot(y, b)) == pytest.approx(res.objective, abs=1e-9)
    # dual feasibility for a minimization: A^T y <= c
    assert np.all(np.asarray(A).T @ y <= np.asarray(c) + 1e-9)


def test_beale_cycling_example():
    # classic degenerate instance that cycles under naive pricing
    c = [-0.75, 150.0, -0.02, 6.0]
    A = [
        [0.25, -60.0, -1.0 / 25.0, 9.0],
        [0.5, -90.0, -1.0 / 50.0, 3.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
    b = [0.0, 0.0, 1.0]
    res = solve_lp(c, A, b, ["<=", "<=", "<="])
    assert res.status == "optimal"
    assert res.objective == pytest.approx(-0.05)


def test_exact_refinement():
    res = solve_lp([-1, -1], [[2, 1], [1, 3]], [3, 5], ["<=", "<="], refine=True)
    assert res.exact
    assert res.objective == pytest.approx(float(-(Fraction(4, 5) + Fraction(7, 5))))


def brute_force_optimum(c, A, b, senses):
    """Enumerate basic feasible points of {Ax sense b, x >= 0}."""
    n = len(c)
    rows = [(np.asarray(a, float), float(bi), s) for a, bi, s in zip(A, b, senses)]
    # add x_j >= 0 as candidate active constraints
    cands = [(np.asarray(a, float), bi) for a, bi, _ in rows]
    cands += [(np.eye(n)[j], 0.0) for j in range(n)]
    best = None
    for combo in itertools.combinations(range(len(cands)), n):
        M = np.array([cands[i][0] for i in combo])
        rhs = np.array([cands[i][1] for i in combo])
        if abs(np.linalg.det(M)) < 1e-9:
            continue
        x = np.linalg.solve(M, rhs)
        if np.any(x < -1e-9):
            continue
        ok = True
        for a, bi, s in rows:
            v = float(a @ x)
            if s == "<=" and v > bi + 1e-9:
                ok = False
            if s == ">=" and v < bi - 1e-9:
                ok = False
            if s == "=" and abs(v - bi) > 1e-9:
                ok = False
        if ok:
            val = float(np.dot(c, x))
            if best is None or val < best:
                best = val
    return best


@given(st.integers(min_value=0, max_value=10**6))
@settings(max_examples=40, deadline=None)
def test_matches_vertex_enumeration(seed):
    rng = Rng(seed)
    n, m = 3, 4
    A = rng.uniforms(m * n).reshape(m, n) * 2.0 - 0.5
    b = rng.uniforms(m) * 2.0 + 0.5
    c = rng.uniforms(n) * 2.0 - 1.0
    senses = ["<="] * m  # bounded in the positive orthant, x = 0 feasible
    res = solve_lp(c, A, b, senses)
    want = brute_force_optimum(c, A, b, senses)
    if res.status == "optimal" and want is not None:
        assert res.objective == pytest.approx(want, abs=1e-7)
        assert float(np.dot(res.duals, b)) == pytest.approx(res.objective, abs=1e-7)


def test_iteration_cap():
    res = solve_lp([-1, -1], [[1, 1]], [1], ["<="], max_iter=1)
    assert res.status in ("optimal", "iteration_cap")
