import random
from fractions import Fraction as F

import numpy as np
import pytest

from matchgames import engine, generators, verify
from matchgames.core import (
    MatchingGame,
    MixedAssignment,
    MixedStrategy,
    TransferAssignment,
    TransferGame,
    ZeroSumGame,
    make_profile,
)

EX_ORDER = [0, 2, 1]


# ---------------------------------------------------------------------------
# external stability
# ---------------------------------------------------------------------------


def test_worked_example_profiles_pass(example_market):
    g = example_market
    pi1, _ = engine.propose_dispose(g, order=EX_ORDER)
    rep = verify.external_stability(g, pi1)
    assert rep.externally_stable and not rep.blocking_pairs
    pi2, _ = engine.stabilize(g, pi1)
    final = verify.full_report(g, pi2)
    assert final.green and final.internally_stable
    # residuals recorded per couple and nonnegative
    assert set(final.cne_residuals) == set(pi2.matched_pairs())
    assert all(a >= -1e-9 and b >= -1e-9 for a, b in final.cne_residuals.values())


def test_irp_violation_flagged(example_market):
    g = example_market
    pi1, _ = engine.propose_dispose(g, order=EX_ORDER)
    # push woman 0 three epsilons below her IRP of zero
    bad2 = make_profile(g, pi1.mu, {
        k: (TransferAssignment(a.x, a.y + 67.0) if k == (1, 0) else a)
        for k, a in pi1.assignments.items()
    })
    assert bad2.v[0] == -3.0  # 3 eps below IRP 0
    rep = verify.external_stability(g, bad2)
    assert any(side == "woman" and idx == 0 for side, idx, *_ in rep.irp_violations)
    assert not rep.externally_stable


def test_corrupted_profile_produces_blocking_pairs(example_market):
    g = example_market
    pi1, _ = engine.propose_dispose(g, order=EX_ORDER)
    # lower woman 0 by 3*eps: pairs involving her become blocking
    assigns = dict(pi1.assignments)
    a = assigns[(1, 0)]
    assigns[(1, 0)] = TransferAssignment(a.x, a.y + 3.0)
    bad = make_profile(g, pi1.mu, assigns)
    rep = verify.external_stability(g, bad)
    assert not rep.externally_stable
    assert any(j == 0 for _, j, _, _ in rep.blocking_pairs)
    grid = verify.brute_force_blocking(g, bad, g.epsilon)
    assert {(i, j) for i, j, _ in grid} == {(i, j) for i, j, _, _ in rep.blocking_pairs}


def test_blocking_margin_closed_forms():
    m, wit = verify.blocking_margin(ZeroSumGame([[-10, 10]]), -3.0, -2.0, 1.0)
    # crossing at level 1/2: margins min(3.5 - ... ) -> (u+e, v+e) = (-2, -1)
    assert m == pytest.approx(1.5)
    m, _ = verify.blocking_margin(TransferGame(10, 10), 5.0, 5.0, 1.0)
    assert m == pytest.approx((20 - 12) / 2)


def test_empty_market_brute_force():
    g = MatchingGame(0, 0, "transfer", {}, (), (), 1.0)
    pi = make_profile(g, {}, {})
    assert verify.brute_force_blocking(g, pi, 1.0) == []


# ---------------------------------------------------------------------------
# verifier vs grid oracle
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("game_class", ["zero_sum", "strictly_competitive", "transfer", "repeated"])
def test_grid_oracle_agreement_small(game_class):
    eps = F(1, 4) if game_class == "repeated" else 0.25
    n = 10 if game_class == "repeated" else 25
    for seed in range(n):
        g = generators.generate(game_class, 3, 3, actions=2, seed=seed, epsilon=eps)
        pi, report, trace = engine.solve(g)
        exact = verify.external_stability(g, pi, g.epsilon)
        grid = verify.brute_force_blocking(g, pi, g.epsilon)
        exact_pairs = {(i, j) for i, j, _, m in exact.blocking_pairs}
        grid_pairs = {(i, j) for i, j, m in grid}
        assert grid_pairs <= exact_pairs, (game_class, seed)
        # completeness at matching slack: exact margins above the grid error
        span = 20.0
        slack = span * 1e-2 + 1e-6
        big = {(i, j) for i, j, _, m in exact.blocking_pairs if m > slack}
        assert big <= grid_pairs, (game_class, seed)


def test_metamorphic_transfer_shift(example_market):
    g = example_market
    pi, report, _ = engine.solve(g, order=EX_ORDER)
    shift = 7.0
    couples = {
        (i, j): TransferGame(g.game(i, j).a + shift, g.game(i, j).b)
        for i in range(3) for j in range(3)
    }
    g2 = MatchingGame(3, 3, "transfer", couples,
                      tuple(x + shift for x in g.irp_men), g.irp_women, g.epsilon)
    pi2, report2, _ = engine.solve(g2, order=EX_ORDER)
    assert report2.green == report.green
    assert tuple(u2 - u1 for u1, u2 in zip(pi.u, pi2.u)) == (shift,) * 3
    assert pi2.v == pi.v


# ---------------------------------------------------------------------------
# internal stability
# ---------------------------------------------------------------------------


def _one_couple_transfer_market(a, b, irp_i, irp_j, eps):
    return MatchingGame(1, 1, "transfer", {(0, 0): TransferGame(a, b)},
                        (irp_i,), (irp_j,), eps)


def test_internal_stability_transfer_example():
    # base utility 10/0, floors at 1: the stable contract is x = 1, y = 0
    g = _one_couple_transfer_market(10.0, 0.0, 1.0, 1.0, 0.1)
    ok = make_profile(g, {0: 0}, {(0, 0): TransferAssignment(1.0, 0.0)})
    rep = verify.internal_stability(g, ok)
    assert rep.internally_stable
    # paying 2 leaves the man a feasible gain of about 1 > eps
    too_much = make_profile(g, {0: 0}, {(0, 0): TransferAssignment(2.0, 0.0)})
    rep = verify.internal_stability(g, too_much)
    assert not rep.internally_stable
    gain_u, _ = rep.cne_residuals[(0, 0)]
    assert gain_u > 1.0 - 1e-9


def test_internal_stability_pd_half_cooperation():
    from matchgames.core import CompetitiveGame

    A = [[2.0, 0.0], [3.0, -1.0]]
    B = [[2.0, 3.0], [0.0, -1.0]]
    g = MatchingGame(1, 1, "strictly_competitive",
                     {(0, 0): CompetitiveGame(A, B)}, (1.0,), (1.0,), 0.1)
    half = MixedStrategy.of([0.5, 0.5])
    pi = make_profile(g, {0: 0}, {(0, 0): MixedAssignment(half, half)})
    rep = verify.internal_stability(g, pi)
    assert rep.internally_stable


def test_internal_stability_repeated_payoff_characterization():
    from matchgames import repeated as repmod
    from matchgames.core import RepeatedAssignment, RepeatedGame

    stage = RepeatedGame([[2, 0], [3, -1]], [[2, 3], [0, -1]])
    g = MatchingGame(1, 1, "repeated", {(0, 0): stage},
                     (F(1),), (F(1),), F(1, 10))
    sig = repmod.cne_repeated(stage, F(1), F(1), F(1, 10))
    pi = make_profile(g, {0: 0}, {(0, 0): RepeatedAssignment(sig)})
    rep = verify.internal_stability(g, pi)
    assert rep.internally_stable
    # a schedule parking the man below his acceptable set is flagged
    bad_sig = repmod.achieve_payoff(stage, (F(0), F(3)))
    pi_bad = make_profile(g, {0: 0}, {(0, 0): RepeatedAssignment(bad_sig)})
    rep = verify.internal_stability(g, pi_bad)
    assert not rep.internally_stable
