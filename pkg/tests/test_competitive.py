import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matchgames import competitive as comp
from matchgames import zerosum as zs
from matchgames.core import ContractViolation
from tests.conftest import bimatrix_cne_gains, make_competitive


def test_detect_affine_examples():
    m = comp.detect_affine([[3, 5], [5, 3]], [[0, 1], [1, 0]])
    assert m is not None
    assert m.direction == comp.B_FROM_A
    assert m.alpha == pytest.approx(0.5)
    assert m.offset == pytest.approx(-1.5)  # B = A/2 - 3/2

    m = comp.detect_affine([[1, 0], [0, 1]], [[1, 0], [0, 1]])
    assert (m.alpha, m.offset) == (1.0, 0.0)

    assert comp.detect_affine([[1, 0], [0, 1]], [[0, 1], [1, 0]]) is None

    m = comp.detect_affine([[2, 2], [2, 2]], [[5, 5], [5, 5]])
    assert m.alpha == 1.0 and m.offset == pytest.approx(-3.0)

    # one-sided constant pair is not an affine variant
    assert comp.detect_affine([[1, 2], [3, 4]], [[5, 5], [5, 5]]) is None


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**7))
def test_detect_affine_reconstruction(seed):
    r = random.Random(seed)
    m, n = r.randint(1, 4), r.randint(1, 4)
    A = np.array([[r.randint(-10, 10) for _ in range(n)] for _ in range(m)], dtype=float)
    lam = r.uniform(0.05, 5.0)
    mu = r.uniform(-5, 5)
    B = lam * A + mu
    got = comp.detect_affine(A, B)
    if A.max() == A.min():
        assert got is not None and got.alpha == 1.0
        return
    assert got is not None
    if got.direction == comp.A_FROM_B:
        assert np.max(np.abs(A - (got.alpha * B + got.offset))) < 1e-9
    else:
        assert np.max(np.abs(B - (got.alpha * A + got.offset))) < 1e-9
    assert got.alpha <= 1.0 + 1e-12


def test_transform_thresholds():
    ident = comp.AffineMap(1.0, 0.0, comp.A_FROM_B)
    assert comp.transform_thresholds(ident, 3.0, 4.0) == (3.0, -4.0)
    m = comp.AffineMap(0.5, 3.0, comp.A_FROM_B)  # offset = a_min - b_min*alpha
    u_k, v_k = comp.transform_thresholds(m, 3.0, 0.0)
    assert u_k == pytest.approx((3.0 - 3.0) / 0.5)
    assert v_k == 0.0


def test_transform_outside_options_eq_examples():
    ident = comp.AffineMap(1.0, 0.0, comp.A_FROM_B)
    assert comp.transform_outside_options(ident, 5.0, 2.0, 1.0) == (5.0, -2.0)
    m = comp.AffineMap(0.5, 3.0, comp.A_FROM_B)
    u_k, v_k = comp.transform_outside_options(m, 5.0, 0.0, 1.0)
    assert u_k == pytest.approx(3.0)  # (5-3)/0.5 - 1*(0.5/0.5)
    assert v_k == pytest.approx(0.0)


def test_kernel_rejects_non_competitive():
    with pytest.raises(ContractViolation):
        comp.kernel_of([[1, 0], [0, 1]], [[1, 0], [0, 1]])  # B aligned with A


def test_cne_zero_sum_input_matches_zerosum():
    A = np.array([[1.0, -1.0], [-1.0, 1.0]])
    x1, y1, val = zs.cne(A, 0.5, 1.0, 0.1)
    x2, y2, (u, v) = comp.cne_competitive(A, -A, 0.5, -1.0, 0.1)
    assert u == pytest.approx(val)
    assert tuple(x2.weights) == pytest.approx(tuple(x1.weights))
    assert tuple(y2.weights) == pytest.approx(tuple(y1.weights))


def test_cne_constant_woman_matrix():
    # constant woman payoffs: she has no deviations, any equilibrium accepted
    g = make_competitive([[2.0, 2.0], [2.0, 2.0]], 1.0, 0.0)
    x, y, (u, v) = comp.cne_competitive(g.A, g.B, 1.0, -3.0, 0.5)
    assert u == pytest.approx(2.0) and v == pytest.approx(-2.0)


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10**7))
def test_cne_passes_original_game_grid_check(seed):
    r = random.Random(seed)
    m, n = r.randint(1, 3), r.randint(1, 3)
    A = np.array([[r.randint(-10, 10) for _ in range(n)] for _ in range(m)], dtype=float)
    lam = r.choice([0.25, 0.5, 1.0, 2.0, 4.0])
    mu = r.randint(-5, 5)
    g = make_competitive(A, lam, mu)
    eps = r.choice([0.25, 1.0])
    k = comp.kernel_of(g.A, g.B)
    mn, mx = k.level_range()
    ell = r.uniform(mn, mx)
    u = k.man_payoff(ell) + eps - r.uniform(0, 3 * eps)
    v = k.woman_payoff(ell) + eps - r.uniform(0, 3 * eps)
    x, y, (cu, cv) = comp.cne_competitive(g.A, g.B, u, v, eps)
    man_gain, woman_gain, _, _ = bimatrix_cne_gains(g.A, g.B, x, y, u, v, eps, res=2e-2)
    assert man_gain <= eps + 1e-6
    assert woman_gain <= eps + 1e-6


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**7))
def test_sign_agreement_on_sampled_quadruples(seed):
    r = random.Random(seed)
    m, n = r.randint(2, 3), r.randint(2, 3)
    A = np.array([[r.randint(-10, 10) for _ in range(n)] for _ in range(m)], dtype=float)
    g = make_competitive(A, r.choice([0.5, 1.0, 2.0]), r.randint(-3, 3))
    C = -np.asarray(g.B)  # aligned with A
    for _ in range(20):
        x = np.random.RandomState(r.randint(0, 10**6)).dirichlet(np.ones(m))
        y = np.random.RandomState(r.randint(0, 10**6)).dirichlet(np.ones(n))
        x2 = np.random.RandomState(r.randint(0, 10**6)).dirichlet(np.ones(m))
        y2 = np.random.RandomState(r.randint(0, 10**6)).dirichlet(np.ones(n))
        da = float(x @ A @ y - x2 @ A @ y2)
        dc = float(x @ C @ y - x2 @ C @ y2)
        if abs(dc) > 1e-6:
            assert da == 0 or np.sign(da) == np.sign(dc)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**7))
def test_cne_set_equivalence_via_checkers(seed):
    # a profile accepted by the kernel checker under transformed thresholds is
    # accepted by the original-game checker
    r = random.Random(seed)
    A = np.array([[r.randint(-9, 9) for _ in range(3)] for _ in range(3)], dtype=float)
    g = make_competitive(A, r.choice([0.5, 2.0]), r.randint(-3, 3))
    eps = 0.5
    k = comp.kernel_of(g.A, g.B)
    mn, mx = k.level_range()
    ell = r.uniform(mn, mx)
    u = k.man_payoff(ell) + eps - r.uniform(0, 2 * eps)
    v = k.woman_payoff(ell) + eps - r.uniform(0, 2 * eps)
    x, y, _ = comp.cne_competitive(g.A, g.B, u, v, eps)
    u_k, v_k = comp.transform_outside_options(k.map, u, v, eps)
    # kernel checker
    km, kw, _, _ = bimatrix_cne_gains(k.Z, -k.Z, x, y, u_k, -v_k, eps, res=2e-2)
    assert km <= eps + 1e-6 and kw <= eps + 1e-6
    # original checker
    om, ow, _, _ = bimatrix_cne_gains(g.A, g.B, x, y, u, v, eps, res=2e-2)
    assert om <= eps + 1e-6 and ow <= eps + 1e-6
