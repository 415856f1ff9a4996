import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matchgames import linprog as lp
from matchgames.linprog import EQ, GE, LE, MAX_, MIN_, FLOAT, RATIONAL, LinearProgram


def test_one_variable_box():
    p = LinearProgram(objective=[1], sense=MAX_)
    p.add([1], LE, 1)
    sol = lp.solve(p)
    assert sol.optimal and sol.value == pytest.approx(1.0)


def test_statuses():
    p = LinearProgram(objective=[1], sense=MAX_)
    p.add([1], GE, 2)
    p.add([1], LE, 1)
    assert lp.solve(p).status == lp.INFEASIBLE
    q = LinearProgram(objective=[1], sense=MAX_)
    q.add([-1], LE, 0)
    assert lp.solve(q).status == lp.UNBOUNDED


def test_matching_pennies_value_lp():
    w, x, y = lp.game_value([[1, -1], [-1, 1]])
    assert w == pytest.approx(0.0, abs=1e-9)
    assert tuple(x.weights) == pytest.approx((0.5, 0.5))
    assert tuple(y.weights) == pytest.approx((0.5, 0.5))


def test_game_value_single_entry():
    w, x, y = lp.game_value([[2]])
    assert (w, x.weights, y.weights) == (2.0, (1.0,), (1.0,))


def test_game_value_pd_row_matrix_vs_grid():
    # independent check: 1e-3 grid over the column mixture q
    A = np.array([[2.0, 0.0], [3.0, -1.0]])
    grid = np.linspace(0, 1, 1001)
    vals = [max(2 * q, 4 * q - 1) for q in grid]
    w_grid = min(vals)
    w, x, y = lp.game_value(A)
    assert w == pytest.approx(w_grid, abs=1e-9)
    assert w == pytest.approx(0.0, abs=1e-9)
    # saddle certificate by pure-strategy sweep
    ya = y.as_array()
    assert (A @ ya).max() <= w + 1e-9
    xa = x.as_array()
    assert (xa @ A).min() >= w - 1e-9


def test_hull_lp_pd_floor_vs_vertex_pair_brute_force():
    # max A-average s.t. B-average >= 1 over the joint-cell simplex; the
    # optimum of such a 2-constraint LP lies on a segment between cell pairs
    cells = [(2, 2), (0, 3), (3, 0), (-1, -1)]
    best = -np.inf
    for (a1, b1), (a2, b2) in itertools.product(cells, repeat=2):
        for t in np.linspace(0, 1, 2001):
            a = a1 * t + a2 * (1 - t)
            b = b1 * t + b2 * (1 - t)
            if b >= 1 - 1e-12:
                best = max(best, a)
    p = LinearProgram(objective=[c[0] for c in cells], sense=MAX_)
    p.add([c[1] for c in cells], GE, 1)
    p.add([1, 1, 1, 1], EQ, 1)
    sol = lp.solve(p)
    assert sol.value == pytest.approx(best, abs=1e-3)
    assert sol.value == pytest.approx(2.5, abs=1e-9)


def test_minmax_levels_pd_and_constant():
    a, b, ypun, xpun = lp.minmax_levels([[2, 0], [3, -1]], [[2, 3], [0, -1]])
    assert (a, b) == (pytest.approx(0.0, abs=1e-9), pytest.approx(0.0, abs=1e-9))
    a, b, _, _ = lp.minmax_levels([[5]], [[5]])
    assert (a, b) == (5.0, 5.0)


def test_minmax_coordination_vs_grid():
    # alpha = min_q max(4q, (1-q)/2), brute-forced on a 1e-4 grid
    A = [[4, 0], [0, 0.5]]
    B = [[0.5, 0], [0, 4]]
    grid = np.linspace(0, 1, 10001)
    alpha_grid = min(max(4 * q, (1 - q) / 2) for q in grid)
    a, b, _, _ = lp.minmax_levels(A, B)
    assert a == pytest.approx(alpha_grid, abs=1e-4)
    assert a == pytest.approx(4 / 9, abs=1e-9)
    assert b == pytest.approx(4 / 9, abs=1e-9)


def test_rational_mode_exactness():
    A = [[Fraction(1, 3), Fraction(-1, 7)], [Fraction(-2, 5), Fraction(1, 2)]]
    w, x, y = lp.game_value(A, RATIONAL)
    assert isinstance(w, Fraction)
    # exact saddle certificate with zero residual
    for t in range(2):
        assert sum(x.weights[s] * A[s][t] for s in range(2)) >= w
    for s in range(2):
        assert sum(A[s][t] * y.weights[t] for t in range(2)) <= w


def test_rational_feasibility_system_zero_residual():
    # cell weights with prescribed exact averages
    avec = [Fraction(2), Fraction(0), Fraction(3), Fraction(-1)]
    bvec = [Fraction(2), Fraction(3), Fraction(0), Fraction(-1)]
    p = LinearProgram(objective=[0] * 4, sense=MIN_)
    p.add(avec, EQ, Fraction(1))
    p.add(bvec, EQ, Fraction(1))
    p.add([1] * 4, EQ, 1)
    sol = lp.solve(p, RATIONAL)
    assert sol.optimal
    lam = sol.exact_point
    assert sum(a * l for a, l in zip(avec, lam)) == 1
    assert sum(b * l for b, l in zip(bvec, lam)) == 1
    assert sum(lam) == 1 and all(l >= 0 for l in lam)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_strong_duality_random(seed):
    # primal: min c.x s.t. Ax >= b, x >= 0; dual: max b.y s.t. A^T y <= c, y >= 0
    r = random.Random(seed)
    m, n = r.randint(1, 4), r.randint(1, 4)
    A = [[r.randint(-5, 5) for _ in range(n)] for _ in range(m)]
    c = [r.randint(1, 9) for _ in range(n)]  # positive costs keep it bounded
    b = [r.randint(-5, 0) for _ in range(m)]  # x = 0 always feasible
    p = LinearProgram(objective=c, sense=MIN_)
    for row, rhs in zip(A, b):
        p.add(row, GE, rhs)
    d = LinearProgram(objective=b, sense=MAX_)
    for t in range(n):
        d.add([A[s][t] for s in range(m)], LE, c[t])
    ps, ds = lp.solve(p), lp.solve(d)
    assert ps.optimal and ds.optimal
    assert ps.value == pytest.approx(ds.value, abs=1e-9)
    # exact agreement in rational mode
    pr, dr = lp.solve(p, RATIONAL), lp.solve(d, RATIONAL)
    assert Fraction(pr.value) == Fraction(dr.value)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_game_value_role_swap(seed):
    r = random.Random(seed)
    m, n = r.randint(1, 4), r.randint(1, 4)
    A = np.array([[r.randint(-9, 9) for _ in range(n)] for _ in range(m)], dtype=float)
    w1, _, _ = lp.game_value(A)
    w2, _, _ = lp.game_value(-A.T)
    assert w1 == pytest.approx(-w2, abs=1e-8)


def test_general_bounds_support():
    # finite lower/upper bounds route through shifting and extra rows
    p = LinearProgram(objective=[1, 1], sense=MAX_, bounds=[(2, 5), (None, 3)])
    p.add([1, 1], LE, 7)
    sol = lp.solve(p)
    assert sol.optimal and sol.value == pytest.approx(7.0)
    assert sol.point[0] >= 2 - 1e-9 and sol.point[0] <= 5 + 1e-9
