"""Infinitely repeated bi-matrix couples.

Feasible-payoff geometry over the convex hull of stage payoff pairs, cyclic
pure schedules achieving any rational hull point, punishment levels, the
folk-theorem CNE construction, and finite-horizon simulation.

Everything here is exact: stage matrices, targets, epsilon and schedule
averages are ``Fraction``s, so emitted schedules hit their limit payoffs with
zero residual and runs are reproducible byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .core import (
    ContractViolation,
    MixedStrategy,
    NoFeasibleAgreement,
    Punishment,
    RepeatedGame,
    RepeatedStrategy,
)
from . import linprog
from .linprog import EQ, GE, LE, MAX_, MIN_, RATIONAL, LinearProgram

RTOL = Fraction(1, 10**9)


@dataclass(frozen=True)
class PayoffSets:
    """Hull vertices plus punishment levels of one stage game."""

    hull_vertices: tuple  # ((a, b) Fraction pairs, one per cell, lex order)
    alpha: Fraction
    beta: Fraction
    punish_y: MixedStrategy  # woman's minmax mixture holding the man to alpha
    punish_x: MixedStrategy  # man's minmax mixture holding the woman to beta


def payoff_sets(game: RepeatedGame) -> PayoffSets:
    alpha, beta, y_pun, x_pun = linprog.minmax_levels(game.A, game.B, RATIONAL)
    verts = tuple(pay for _, pay in game.cells())
    return PayoffSets(verts, alpha, beta, y_pun, x_pun)


def _cell_vectors(game: RepeatedGame):
    avec = [a for _, (a, _) in game.cells()]
    bvec = [b for _, (_, b) in game.cells()]
    return avec, bvec


def _hull_lp(game: RepeatedGame, objective, sense, extra_rows) -> linprog.LpSolution:
    """LP over the joint-cell simplex with rows in (A-avg, B-avg) space."""
    avec, bvec = _cell_vectors(game)
    n = len(avec)
    lp = LinearProgram(objective=objective, sense=sense)
    for coeffs, rel, rhs in extra_rows:
        lp.add(coeffs, rel, rhs)
    lp.add([1] * n, EQ, 1)
    return linprog.solve(lp, RATIONAL)


def in_hull(game: RepeatedGame, target: Tuple[Fraction, Fraction]) -> bool:
    avec, bvec = _cell_vectors(game)
    n = len(avec)
    sol = _hull_lp(
        game,
        [0] * n,
        MIN_,
        [(avec, EQ, target[0]), (bvec, EQ, target[1])],
    )
    return sol.optimal


def _schedule_from_weights(game: RepeatedGame, weights: Sequence[Fraction]):
    """Clear denominators and lay the cells out consecutively in lex order."""
    n_cycle = 1
    for w in weights:
        if w:
            n_cycle = math.lcm(n_cycle, w.denominator)
    schedule = []
    for (cell, _), w in zip(game.cells(), weights):
        count = int(w * n_cycle)
        schedule.extend([cell] * count)
    return tuple(schedule)


def achieve_payoff(game: RepeatedGame, target: Tuple[Fraction, Fraction],
                   punish_man: Optional[Punishment] = None,
                   punish_woman: Optional[Punishment] = None) -> RepeatedStrategy:
    """Cyclic pure schedule whose exact average is ``target``.

    Solves the three-equation cell-weight system in rational arithmetic and
    plays each cell for its cleared-denominator count, lexicographically.
    Weight selection is canonical: a single cell when the target is a vertex,
    the uniform mixture over all cells when that already hits the target
    (this keeps small symmetric instances on their natural full cycle), and
    otherwise the basic solution of the feasibility LP.
    """
    ta, tb = Fraction(target[0]), Fraction(target[1])
    avec, bvec = _cell_vectors(game)
    n = len(avec)

    for k, (cell, pay) in enumerate(game.cells()):
        if pay == (ta, tb):
            weights = [Fraction(0)] * n
            weights[k] = Fraction(1)
            break
    else:
        uniform = [Fraction(1, n)] * n
        if sum(avec) == ta * n and sum(bvec) == tb * n:
            weights = uniform
        else:
            sol = _hull_lp(
                game, [0] * n, MIN_, [(avec, EQ, ta), (bvec, EQ, tb)]
            )
            if not sol.optimal:
                raise NoFeasibleAgreement("payoff outside feasible set")
            weights = [Fraction(w) for w in sol.exact_point]

    schedule = _schedule_from_weights(game, weights)
    return RepeatedStrategy(schedule, (ta, tb), punish_man, punish_woman)


def best_in_hull(game: RepeatedGame, floor_v) -> Optional[Tuple[Fraction, Fraction, list]]:
    """Max A-average subject to B-average >= floor_v over the joint simplex.

    Ties on the A-average are broken by maximizing the B-average, so outputs
    are deterministic; None when the floor exceeds max B (partner
    unreachable).
    """
    floor_v = Fraction(floor_v)
    avec, bvec = _cell_vectors(game)
    n = len(avec)
    if floor_v > max(bvec):
        return None
    sol = _hull_lp(game, avec, MAX_, [(bvec, GE, floor_v)])
    if not sol.optimal:
        return None
    u_opt = Fraction(sol.value)
    sol2 = _hull_lp(
        game, bvec, MAX_, [(bvec, GE, floor_v), (avec, EQ, u_opt)]
    )
    v_opt = Fraction(sol2.value)
    return u_opt, v_opt, list(sol2.exact_point)


def min_v_at_max_u(game: RepeatedGame, floor_v) -> Optional[Tuple[Fraction, Fraction, list]]:
    """Like best_in_hull but drives the partner down to the floor when possible."""
    floor_v = Fraction(floor_v)
    avec, bvec = _cell_vectors(game)
    if floor_v > max(bvec):
        return None
    sol = _hull_lp(game, avec, MAX_, [(bvec, GE, floor_v)])
    if not sol.optimal:
        return None
    u_opt = Fraction(sol.value)
    sol2 = _hull_lp(
        game, bvec, MIN_, [(bvec, GE, floor_v), (avec, EQ, u_opt)]
    )
    v_opt = Fraction(sol2.value)
    return u_opt, v_opt, list(sol2.exact_point)


def punishment_levels(game: RepeatedGame) -> Tuple[Fraction, Fraction]:
    ps = payoff_sets(game)
    return ps.alpha, ps.beta


def _current_qualifies(game, ps, limit, u, v, eps):
    """Punishment arming for a current point that is already an eps-CNE, else None.

    Any eps-constrained equilibrium is a legitimate oracle output, so a couple
    whose standing agreement still qualifies keeps it; this also stops payoff
    drops from rippling through other couples' outside options.
    """
    avec, bvec = _cell_vectors(game)
    n = len(avec)
    ub, vb = limit
    if ub < u - eps or vb < v - eps:
        return None
    inter = _hull_lp(
        game, [0] * n, MIN_,
        [(avec, GE, max(ps.alpha, u - eps)), (bvec, GE, max(ps.beta, v - eps))],
    )
    pun_man = Punishment(ps.punish_y.weights, ps.alpha)
    pun_woman = Punishment(ps.punish_x.weights, ps.beta)
    if inter.optimal:
        if ub >= ps.alpha - eps and vb >= ps.beta - eps:
            return pun_man, pun_woman
        return None
    if u - eps >= ps.alpha:
        sol = _hull_lp(game, bvec, MAX_, [(avec, GE, u - eps)])
        if vb >= Fraction(sol.value) - eps:
            return pun_man, None
        return None
    sol = _hull_lp(game, avec, MAX_, [(bvec, GE, v - eps)])
    if ub >= Fraction(sol.value) - eps:
        return None, pun_woman
    return None


def cne_repeated(game: RepeatedGame, u, v, eps,
                 current: Optional[RepeatedStrategy] = None) -> RepeatedStrategy:
    """Folk-theorem constrained Nash equilibrium for outside options (u, v).

    A current schedule that still qualifies is kept (with punishments armed
    for its case).  Otherwise: when the uniform-equilibrium set meets the
    acceptable set, pick the point maximizing the man's average (then the
    woman's) and guard it with mutual punishment.  Else exactly one side is
    exposed: push the other side's average to its acceptable maximum, shift
    it up by eps when the hull allows, punish only the protected side's
    deviations and ignore the exposed side's (it can only hurt itself).
    """
    u, v, eps = Fraction(u), Fraction(v), Fraction(eps)
    ps = payoff_sets(game)
    avec, bvec = _cell_vectors(game)
    n = len(avec)

    feas = _hull_lp(game, [0] * n, MIN_,
                    [(avec, GE, u - eps), (bvec, GE, v - eps)])
    if not feas.optimal:
        raise NoFeasibleAgreement("acceptable payoff set is empty")

    if current is not None:
        arming = _current_qualifies(game, ps, current.limit_payoff, u, v, eps)
        if arming is not None:
            return RepeatedStrategy(current.schedule, current.limit_payoff, *arming)

    pun_man = Punishment(ps.punish_y.weights, ps.alpha)
    pun_woman = Punishment(ps.punish_x.weights, ps.beta)

    inter = _hull_lp(
        game, avec, MAX_,
        [(avec, GE, max(ps.alpha, u - eps)), (bvec, GE, max(ps.beta, v - eps))],
    )
    if inter.optimal:
        u_opt = Fraction(inter.value)
        sol2 = _hull_lp(
            game, bvec, MAX_,
            [(avec, EQ, u_opt), (bvec, GE, max(ps.beta, v - eps))],
        )
        target = (u_opt, Fraction(sol2.value))
        return achieve_payoff(game, target, pun_man, pun_woman)

    if u - eps >= ps.alpha:
        # woman's side exposed: max her acceptable average, then max his
        sol = _hull_lp(game, bvec, MAX_, [(avec, GE, u - eps)])
        v_bar = Fraction(sol.value)
        sol2 = _hull_lp(game, avec, MAX_, [(bvec, EQ, v_bar), (avec, GE, u - eps)])
        u_bar = Fraction(sol2.value)
        target = (u_bar, v_bar + eps) if in_hull(game, (u_bar, v_bar + eps)) else (u_bar, v_bar)
        return achieve_payoff(game, target, pun_man, None)

    # man's side exposed: symmetric
    sol = _hull_lp(game, avec, MAX_, [(bvec, GE, v - eps)])
    u_bar = Fraction(sol.value)
    sol2 = _hull_lp(game, bvec, MAX_, [(avec, EQ, u_bar), (bvec, GE, v - eps)])
    v_bar = Fraction(sol2.value)
    target = (u_bar + eps, v_bar) if in_hull(game, (u_bar + eps, v_bar)) else (u_bar, v_bar)
    return achieve_payoff(game, target, None, pun_woman)


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Deviation:
    """Scripted unilateral deviation: from stage ``start`` (1-based) the
    deviator plays ``actions`` in order, then returns to the schedule (if the
    partner did not switch to punishing)."""

    side: str  # "man" | "woman"
    start: int
    actions: tuple


def _best_response_row(game: RepeatedGame, y_weights) -> Tuple[int, Fraction, Fraction]:
    """Best pure row against a mixed column: (row, own payoff, partner payoff)."""
    best = None
    for s in range(len(game.A)):
        own = sum(Fraction(w) * game.A[s][t] for t, w in enumerate(y_weights))
        other = sum(Fraction(w) * game.B[s][t] for t, w in enumerate(y_weights))
        if best is None or own > best[1]:
            best = (s, own, other)
    return best


def _best_response_col(game: RepeatedGame, x_weights) -> Tuple[int, Fraction, Fraction]:
    best = None
    for t in range(len(game.A[0])):
        own = sum(Fraction(w) * game.B[s][t] for s, w in enumerate(x_weights))
        other = sum(Fraction(w) * game.A[s][t] for s, w in enumerate(x_weights))
        if best is None or own > best[1]:
            best = (t, own, other)
    return best


def simulate(game: RepeatedGame, sigma: RepeatedStrategy, K: int,
             deviation: Optional[Deviation] = None) -> Tuple[Fraction, Fraction]:
    """Exact K-stage average payoffs along the play path.

    Without a deviation the cyclic schedule is followed.  A scripted
    deviation replaces the deviator's action during its window; from the
    stage after the first off-schedule action, the partner's punishment (when
    armed) takes over forever and the deviator best-responds to it, stage
    payoffs being the exact expectations against the punishment mixture.
    """
    if K < 1:
        raise ContractViolation("K must be at least 1")
    n = sigma.cycle_length
    total_u = Fraction(0)
    total_v = Fraction(0)
    deviated = False

    def finish_punished(k0, pun, side):
        # punished stages are identical forever: one expectation, multiplied
        if side == "man":
            _, own, other = _best_response_row(game, pun.strategy)
            return own * (K - k0 + 1), other * (K - k0 + 1)
        _, own, other = _best_response_col(game, pun.strategy)
        return other * (K - k0 + 1), own * (K - k0 + 1)

    dev_end = 0 if deviation is None else deviation.start + len(deviation.actions)
    k = 1
    while k <= K:
        if deviation is None or k >= dev_end:
            if deviated:
                pun = sigma.punish_man if deviation.side == "man" else sigma.punish_woman
                if pun is not None:
                    du, dv = finish_punished(k, pun, deviation.side)
                    return (total_u + du) / K, (total_v + dv) / K
            # remaining stages follow the cycle: close it out arithmetically
            rem = K - k + 1
            cycles, tail = divmod(rem, n)
            if cycles:
                total_u += sigma.limit_payoff[0] * n * cycles
                total_v += sigma.limit_payoff[1] * n * cycles
            for k2 in range(tail):
                s, t = sigma.schedule[(k - 1 + cycles * n + k2) % n]
                total_u += game.A[s][t]
                total_v += game.B[s][t]
            return total_u / K, total_v / K
        s, t = sigma.schedule[(k - 1) % n]
        if deviation.start <= k < dev_end:
            a = deviation.actions[k - deviation.start]
            if deviation.side == "man":
                if a != s:
                    deviated = True
                s = a
            else:
                if a != t:
                    deviated = True
                t = a
        total_u += game.A[s][t]
        total_v += game.B[s][t]
        if deviated:
            pun = sigma.punish_man if deviation.side == "man" else sigma.punish_woman
            if pun is not None and k < K:
                du, dv = finish_punished(k + 1, pun, deviation.side)
                return (total_u + du) / K, (total_v + dv) / K
        k += 1
    return total_u / K, total_v / K
