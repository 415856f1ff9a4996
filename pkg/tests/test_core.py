from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from matchgames.core import (
    AgentId,
    ContractViolation,
    MixedAssignment,
    MixedStrategy,
    RepeatedAssignment,
    RepeatedGame,
    RepeatedStrategy,
    TransferAssignment,
    TransferGame,
    ZeroSumGame,
    evaluate_payoffs,
    make_profile,
    profile_payoffs,
)


def test_agent_id_validation():
    assert AgentId.man(2).index == 2
    assert AgentId.empty("woman").is_empty
    with pytest.raises(ContractViolation):
        AgentId("dog", 0)
    with pytest.raises(ContractViolation):
        AgentId("man", -1)


def test_mixed_strategy_simplex_checks():
    MixedStrategy.of([0.25, 0.75])
    with pytest.raises(ContractViolation):
        MixedStrategy.of([0.5, 0.6])
    with pytest.raises(ContractViolation):
        MixedStrategy.of([-0.1, 1.1])


def test_zero_sum_midpoint_matching_pennies():
    g = ZeroSumGame([[1, -1], [-1, 1]])
    half = MixedStrategy.of([0.5, 0.5])
    u, v = evaluate_payoffs(g, MixedAssignment(half, half))
    assert u == pytest.approx(0) and v == pytest.approx(0)


def test_transfer_payoffs_example():
    # base utilities 83/69, woman transfers 68: payoffs (151, 1)
    g = TransferGame(83, 69)
    u, v = evaluate_payoffs(g, TransferAssignment(0.0, 68.0))
    assert (u, v) == (151.0, 1.0)


def test_repeated_limit_average_four_cycle():
    # prisoners' dilemma stage game; four-cell cycle averages to (1, 1)
    g = RepeatedGame([[2, 0], [3, -1]], [[2, 3], [0, -1]])
    sched = ((1, 1), (0, 1), (1, 0), (0, 0))
    sig = RepeatedStrategy(sched, (Fraction(1), Fraction(1)))
    u, v = evaluate_payoffs(g, RepeatedAssignment(sig))
    assert u == Fraction(1) and v == Fraction(1)


def test_variant_mismatch_raises():
    g = ZeroSumGame([[1]])
    with pytest.raises(ContractViolation):
        evaluate_payoffs(g, TransferAssignment(0, 0))


@given(st.integers(-9, 9), st.integers(-9, 9), st.integers(-9, 9), st.integers(-9, 9))
def test_bilinearity_on_pure_bases(a, b, c, d):
    g = ZeroSumGame([[a, b], [c, d]])
    for s in range(2):
        for t in range(2):
            asg = MixedAssignment(MixedStrategy.pure(s, 2), MixedStrategy.pure(t, 2))
            u, v = evaluate_payoffs(g, asg)
            assert u == g.A[s, t]
            assert v == -g.A[s, t]


@given(
    st.lists(st.floats(0.01, 1), min_size=2, max_size=4),
    st.lists(st.floats(0.01, 1), min_size=2, max_size=4),
    st.integers(0, 10**6),
)
def test_zero_sum_payoffs_sum_to_zero(xw, yw, seed):
    import random

    r = random.Random(seed)
    A = [[r.randint(-10, 10) for _ in range(len(yw))] for _ in range(len(xw))]
    x = MixedStrategy.of([w / sum(xw) for w in xw])
    y = MixedStrategy.of([w / sum(yw) for w in yw])
    u, v = evaluate_payoffs(ZeroSumGame(A), MixedAssignment(x, y))
    assert abs(u + v) < 1e-12


@given(st.floats(0, 50), st.floats(0, 50), st.integers(-20, 20), st.integers(-20, 20))
def test_transfer_constant_sum(x, y, a, b):
    u, v = evaluate_payoffs(TransferGame(a, b), TransferAssignment(x, y))
    assert u + v == pytest.approx(a + b, abs=1e-9)


def test_profile_payoffs_and_cache(example_market):
    g = example_market
    # empty matching: everybody holds their IRP
    pi = make_profile(g, {}, {})
    assert pi.u == (0, 0, 0) and pi.v == (0, 0, 0)

    pi2 = make_profile(
        g,
        {0: 2, 1: 0, 2: 1},
        {
            (0, 2): TransferAssignment(0.0, 27.0),
            (1, 0): TransferAssignment(0.0, 24.0),
            (2, 1): TransferAssignment(0.0, 17.0),
        },
    )
    assert pi2.u == (126.0, 98.0, 66.0)
    assert pi2.v == (64.0, 1.0, 1.0)
    pi2.validate(g)
    # corrupt the cache: validation must notice the drift
    pi2.u = (100.0, 98.0, 66.0)
    with pytest.raises(ContractViolation):
        pi2.validate(g)


def test_profile_rejects_two_men_per_woman(example_market):
    g = example_market
    pi = make_profile(
        g,
        {0: 0, 1: 0},
        {(0, 0): TransferAssignment(0, 0), (1, 0): TransferAssignment(0, 0)},
    )
    with pytest.raises(ContractViolation):
        pi.validate(g)
