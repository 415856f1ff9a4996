"""Propose-dispose and strategy-profile-modification, generic over the
game-class oracles.

Algorithm 1 runs a deferred-acceptance auction: single men propose their
optimal offer, contested women are resolved by a second-price competition,
and accepted offers raise the proposed woman's payoff by at least epsilon.
Algorithm 2 then sweeps the matched couples in ascending man order,
replacing each strategy profile by a constrained Nash equilibrium for the
current outside options until a full sweep changes nothing.

Equilibrium moves can leave a couple whose participation constraints are
jointly infeasible; that couple dissolves and its man re-enters the auction,
so stabilization alternates sweep and auction phases until a joint fixed
point.  At that point no matched couple moves (so every payoff sits within
2*epsilon of its outside options) and no single man has a proposal worth
more than staying single, which yields 2*epsilon-external stability.

Determinism is pinned everywhere: FIFO proposer queue, lowest-index tie
breaks, incumbent wins bid ties, fixed sweep order.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

from .core import (
    MatchingGame,
    MatchingProfile,
    NoFeasibleAgreement,
    OutsideOptions,
    make_profile,
)
from .oracles import Offer, OracleTable

CONVERGENCE_TOL = 1e-9
REENTRY_LIMIT = 3


class EngineError(Exception):
    """An algorithm postcondition failed; carries the trace for debugging."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


# ---------------------------------------------------------------------------
# Trace events
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Propose:
    iteration: int
    man: int
    woman: Optional[int]  # None = matched with the empty player
    u: object
    v: object
    accepted: bool
    assignment: object = None


@dataclass(frozen=True)
class Compete:
    iteration: int
    man: int
    incumbent: int
    woman: int
    bid_man: object
    bid_incumbent: object
    winner: int


@dataclass(frozen=True)
class Settle:
    iteration: int
    winner: int
    woman: int
    level: object
    u: object
    v: object
    assignment: object = None


@dataclass(frozen=True)
class CoupleUpdate:
    sweep: int
    man: int
    woman: int
    old: tuple
    new: tuple
    assignment: object = None  # None marks a dissolution


@dataclass
class EngineTrace:
    events: List[object] = field(default_factory=list)
    iterations: int = 0
    sweeps: int = 0
    rounds: int = 0  # sweep/auction alternations during stabilization
    round_sweeps: List[int] = field(default_factory=list)  # sweeps per round
    iteration_cap: int = 0
    sweep_cap: int = 0
    converged: bool = True  # joint fixed point reached (vs round budget spent)

    def woman_payoff_series(self, j: int) -> list:
        """Payoffs woman j held after each auction event that touched her."""
        out = []
        for e in self.events:
            if isinstance(e, Propose) and e.woman == j and e.accepted:
                out.append(e.v)
            elif isinstance(e, Settle) and e.woman == j:
                out.append(e.v)
        return out


# ---------------------------------------------------------------------------
# Caps
# ---------------------------------------------------------------------------


def v_max(g: MatchingGame, oracles: Optional[OracleTable] = None) -> float:
    """Largest gap between a woman's best achievable payoff and her IRP."""
    oracles = oracles or OracleTable(g)
    best = 0.0
    for j in range(g.women):
        top = max(
            (float(oracles(i, j).max_woman_payoff()) for i in range(g.men)),
            default=float(g.irp_women[j]),
        )
        best = max(best, top - float(g.irp_women[j]))
    return best


def iteration_cap(g: MatchingGame, eps) -> int:
    return max(1, math.ceil(v_max(g) / float(eps)))


def sweep_cap(g: MatchingGame, eps) -> int:
    oracles = OracleTable(g)
    span = 0.0
    for i in range(g.men):
        for j in range(g.women):
            span = max(span, float(oracles(i, j).payoff_span()))
    return math.ceil(span / float(eps)) + 2


# ---------------------------------------------------------------------------
# Shared market state
# ---------------------------------------------------------------------------


@dataclass
class _State:
    u: list
    v: list
    mu: dict  # man -> woman | None (absent while queued)
    holder: dict  # woman -> man
    assignments: dict

    @staticmethod
    def fresh(g: MatchingGame) -> "_State":
        return _State(list(g.irp_men), list(g.irp_women), {}, {}, {})

    @staticmethod
    def of(g: MatchingGame, pi: MatchingProfile) -> "_State":
        holder = {j: i for i, j in pi.mu.items() if j is not None}
        return _State(list(pi.u), list(pi.v), dict(pi.mu), holder, dict(pi.assignments))

    def profile(self, g: MatchingGame) -> MatchingProfile:
        return make_profile(g, self.mu, self.assignments)


def _best_offer(oracles, g, i, v, eps, exclude=None):
    """Man i's optimal offer: (value, woman | None, Offer | None).

    Scans all women plus the empty player (worth his IRP); a woman must beat
    the running best strictly, so ties resolve to the empty player first and
    then the lowest woman index.
    """
    best_val = g.irp_men[i]
    best_j, best_offer = None, None
    for j in range(g.women):
        if j == exclude:
            continue
        offer = oracles(i, j).propose(v[j], eps)
        if offer is None:
            continue
        if offer.u > best_val + CONVERGENCE_TOL:
            best_val, best_j, best_offer = offer.u, j, offer
    return best_val, best_j, best_offer


def _auction(g, oracles, st: _State, queue: List[int], eps, trace: EngineTrace,
             hard_cap: int) -> None:
    """Run propose-dispose until the queue empties, mutating the state."""
    while queue:
        trace.iterations += 1
        if trace.iterations > hard_cap:
            raise EngineError("propose-dispose exceeded its iteration budget", trace)
        i = queue.pop(0)
        val, j, offer = _best_offer(oracles, g, i, st.v, eps)
        if j is None:
            st.mu[i] = None
            st.u[i] = g.irp_men[i]
            trace.events.append(Propose(trace.iterations, i, None, st.u[i], None, True))
            continue
        if j not in st.holder:
            st.mu[i] = j
            st.holder[j] = i
            st.assignments[(i, j)] = offer.assignment
            st.u[i], st.v[j] = offer.u, offer.v
            trace.events.append(
                Propose(trace.iterations, i, j, offer.u, offer.v, True, offer.assignment)
            )
            continue
        # competition: second-price auction between proposer and incumbent
        inc = st.holder[j]
        beta_i, _, _ = _best_offer(oracles, g, i, st.v, eps, exclude=j)
        beta_inc, _, _ = _best_offer(oracles, g, inc, st.v, eps, exclude=j)
        bid_i = oracles(i, j).bid(beta_i)
        bid_inc = oracles(inc, j).bid(beta_inc)
        lam_i = bid_i.v if bid_i is not None else None
        lam_inc = bid_inc.v if bid_inc is not None else None
        trace.events.append(Propose(trace.iterations, i, j, offer.u, offer.v, False))
        if lam_i is None and lam_inc is None:
            queue.append(i)  # nobody can serve her floor; proposer retries later
            continue
        proposer_wins = lam_inc is None or (lam_i is not None and lam_i > lam_inc)
        winner, loser = (i, inc) if proposer_wins else (inc, i)
        lam_loser = lam_inc if proposer_wins else lam_i
        trace.events.append(Compete(trace.iterations, i, inc, j, lam_i, lam_inc, winner))
        # the contested woman always clears her reserve: current payoff + eps
        level = st.v[j] + eps if lam_loser is None else max(lam_loser, st.v[j] + eps)
        settled = oracles(winner, j).settle(level)
        st.mu.pop(loser, None)
        st.assignments.pop((loser, j), None)
        st.mu[winner] = j
        st.holder[j] = winner
        st.assignments[(winner, j)] = settled.assignment
        st.u[winner], st.v[j] = settled.u, settled.v
        st.u[loser] = g.irp_men[loser]
        queue.append(loser)
        trace.events.append(
            Settle(trace.iterations, winner, j, level, settled.u, settled.v,
                   settled.assignment)
        )


def propose_dispose(g: MatchingGame, order: Optional[List[int]] = None,
                    eps=None) -> Tuple[MatchingProfile, EngineTrace]:
    """Compute an eps-externally stable matching profile (Algorithm 1)."""
    eps = g.epsilon if eps is None else eps
    oracles = OracleTable(g)
    trace = EngineTrace()
    trace.iteration_cap = iteration_cap(g, eps)
    queue = list(order) if order else list(range(g.men))
    if sorted(queue) != list(range(g.men)):
        raise EngineError("proposer order must be a permutation of the men")
    st = _State.fresh(g)
    hard_cap = 10 * trace.iteration_cap + 10 * (g.men + 1)
    _auction(g, oracles, st, queue, eps, trace, hard_cap)
    return st.profile(g), trace


# ---------------------------------------------------------------------------
# Outside options and Algorithm 2
# ---------------------------------------------------------------------------


def outside_options(g: MatchingGame, pi: MatchingProfile, i: int, j: int,
                    eps=None, oracles: Optional[OracleTable] = None) -> OutsideOptions:
    """Best eps-padded payoffs each partner can reach outside the couple."""
    eps = g.epsilon if eps is None else eps
    oracles = oracles or OracleTable(g)
    return _outside_options(oracles, g, list(pi.u), list(pi.v), i, j, eps)


def _outside_options(oracles, g, u, v, i, j, eps) -> OutsideOptions:
    u_eps = g.irp_men[i]
    for j2 in range(g.women):
        if j2 == j:
            continue
        offer = oracles(i, j2).propose(v[j2], eps)
        if offer is not None and offer.u > u_eps:
            u_eps = offer.u
    v_eps = g.irp_women[j]
    for i2 in range(g.men):
        if i2 == i:
            continue
        offer = oracles(i2, j).bid(u[i2] + eps)
        if offer is not None and offer.v > v_eps:
            v_eps = offer.v
    return OutsideOptions(u_eps, v_eps)


def _sweep(g, oracles, st: _State, eps, sweep_no, trace) -> Tuple[bool, bool]:
    """One strategy-modification pass; returns (changed, dissolved)."""
    changed = dissolved = False
    for i, j in sorted((i, j) for i, j in st.mu.items() if j is not None):
        oo = _outside_options(oracles, g, st.u, st.v, i, j, eps)
        try:
            offer = oracles(i, j).cne(oo.u_eps, oo.v_eps, eps, st.assignments.get((i, j)))
        except NoFeasibleAgreement:
            old = (st.u[i], st.v[j])
            st.mu[i] = None
            st.holder.pop(j, None)
            st.assignments.pop((i, j), None)
            st.u[i], st.v[j] = g.irp_men[i], g.irp_women[j]
            changed = dissolved = True
            trace.events.append(CoupleUpdate(sweep_no, i, j, old, (st.u[i], st.v[j]), None))
            continue
        if (
            abs(float(offer.u) - float(st.u[i])) > CONVERGENCE_TOL
            or abs(float(offer.v) - float(st.v[j])) > CONVERGENCE_TOL
        ):
            changed = True
            trace.events.append(
                CoupleUpdate(sweep_no, i, j, (st.u[i], st.v[j]), (offer.u, offer.v),
                             offer.assignment)
            )
        st.assignments[(i, j)] = offer.assignment
        st.u[i], st.v[j] = offer.u, offer.v
    return changed, dissolved


def _reentry_pass(g, oracles, st: _State, eps, trace, hard_cap, fired) -> bool:
    """Let every man who can improve by more than eps re-propose.

    A matched man keeps his couple when he loses the competition (the winner
    re-settles at his bid, so the contested woman still rises by at least
    eps); a displaced incumbent re-enters the ordinary auction.  Returns
    whether anything changed.

    The trigger is the joint 2*eps-blocking test: both sides must gain more
    than 2*eps simultaneously (the scan pads the women's floors by an extra
    eps and the man must clear his payoff + 2*eps).  Equilibrium moves park
    payoffs at most 2*eps below outside options, which by this joint test is
    never enough to re-fire -- one-sided gaps would be, because payoff
    frontiers with slopes other than 1 amplify them.  Quiescence of this
    pass therefore certifies external stability at 2*eps.
    """
    changed = False
    for i in range(g.men):
        j_cur = st.mu.get(i)
        padded = [vj + eps for vj in st.v]
        val, j, offer = _best_offer(oracles, g, i, padded, eps, exclude=j_cur)
        if j is None or val <= st.u[i] + 2 * float(eps) + CONVERGENCE_TOL:
            continue
        if fired[(i, j)] >= REENTRY_LIMIT:
            # bounded shots per pair: extraction sweeps re-ignite the same
            # desire cyclically on knife-edge markets, so a pair only gets a
            # few competitions (the report stays honest if it still blocks
            # at the end)
            continue
        fired[(i, j)] += 1
        trace.iterations += 1
        if j not in st.holder:
            changed = True
            if j_cur is not None:
                st.assignments.pop((i, j_cur), None)
                st.holder.pop(j_cur, None)
                st.v[j_cur] = g.irp_women[j_cur]
            st.mu[i] = j
            st.holder[j] = i
            st.assignments[(i, j)] = offer.assignment
            st.u[i], st.v[j] = offer.u, offer.v
            trace.events.append(
                Propose(trace.iterations, i, j, offer.u, offer.v, True, offer.assignment)
            )
            continue
        inc = st.holder[j]
        beta_i, _, _ = _best_offer(oracles, g, i, st.v, eps, exclude=j)
        beta_i = max(beta_i, st.u[i]) if j_cur is not None else beta_i
        beta_inc, _, _ = _best_offer(oracles, g, inc, st.v, eps, exclude=j)
        bid_i = oracles(i, j).bid(beta_i)
        bid_inc = oracles(inc, j).bid(beta_inc)
        lam_i = bid_i.v if bid_i is not None else None
        lam_inc = bid_inc.v if bid_inc is not None else None
        trace.events.append(Propose(trace.iterations, i, j, offer.u, offer.v, False))
        if lam_i is None:
            continue
        changed = True
        proposer_wins = lam_inc is None or lam_i > lam_inc
        winner = i if proposer_wins else inc
        lam_loser = lam_inc if proposer_wins else lam_i
        trace.events.append(Compete(trace.iterations, i, inc, j, lam_i, lam_inc, winner))
        level = st.v[j] + eps if lam_loser is None else max(lam_loser, st.v[j] + eps)
        settled = oracles(winner, j).settle(level)
        if proposer_wins:
            if j_cur is not None:
                st.assignments.pop((i, j_cur), None)
                st.holder.pop(j_cur, None)
                st.v[j_cur] = g.irp_women[j_cur]
            st.mu.pop(inc, None)
            st.assignments.pop((inc, j), None)
            st.u[inc] = g.irp_men[inc]
            st.mu[i] = j
            st.holder[j] = i
        st.assignments[(winner, j)] = settled.assignment
        st.u[winner], st.v[j] = settled.u, settled.v
        trace.events.append(
            Settle(trace.iterations, winner, j, level, settled.u, settled.v,
                   settled.assignment)
        )
        if proposer_wins:
            _auction(g, oracles, st, [inc], eps, trace, hard_cap)
    return changed


def stabilize(g: MatchingGame, pi: MatchingProfile, eps=None) -> Tuple[MatchingProfile, EngineTrace]:
    """Modify strategy profiles to eps-constrained Nash equilibria (Algorithm 2).

    Couples are visited in ascending man order; outside options are
    recomputed against the live profile before each replacement.  Equilibrium
    moves shrink payoffs, which can hand a third party a better-than-eps
    offer or even empty a couple's joint participation set (dissolving it);
    such men re-enter the proposer auction and sweeps resume, until a joint
    fixed point where no couple moves and no man can improve by more than
    eps.  That fixed point is eps-externally stable and the sweep bound
    applies per round.  Raises EngineError when the budgets are exhausted.
    """
    eps = g.epsilon if eps is None else eps
    oracles = OracleTable(g)
    trace = EngineTrace()
    trace.sweep_cap = sweep_cap(g, eps)
    trace.iteration_cap = iteration_cap(g, eps)
    st = _State.of(g, pi)
    hard_iter_cap = 100 * trace.iteration_cap + 100 * (g.men + 1)

    def snapshot():
        return (
            tuple(sorted((i, j) for i, j in st.mu.items() if j is not None)),
            tuple(float(x) for x in st.u),
            tuple(float(x) for x in st.v),
        )

    fired = Counter()
    max_rounds = 2 * (trace.sweep_cap + trace.iteration_cap) + g.men * g.women + 4
    for round_no in range(1, max_rounds + 1):
        trace.rounds = round_no
        sweeps_quiet = converged = False
        this_round = 0
        for k in range(trace.sweep_cap):
            trace.sweeps += 1
            this_round += 1
            changed, _ = _sweep(g, oracles, st, eps, trace.sweeps, trace)
            if not changed:
                converged = True
                sweeps_quiet = k == 0
                break
        trace.round_sweeps.append(this_round)
        if not converged:
            raise EngineError(
                f"strategy modification did not converge within {trace.sweep_cap} sweeps",
                trace,
            )
        mid = snapshot()
        # dissolved or displaced men run the full auction (losers re-propose)
        singles = [i for i in range(g.men) if st.mu.get(i) is None]
        if singles:
            _auction(g, oracles, st, singles, eps, trace, hard_iter_cap)
        _reentry_pass(g, oracles, st, eps, trace, hard_iter_cap, fired)
        if sweeps_quiet and snapshot() == mid:
            return st.profile(g), trace
    # round budget spent: knife-edge markets can orbit between re-matching
    # and extraction; settle the couples once more and hand back the
    # sweep-quiescent state, letting the verifier report any residual
    # blocking pairs honestly
    trace.converged = False
    for _ in range(trace.sweep_cap):
        trace.sweeps += 1
        changed, _ = _sweep(g, oracles, st, eps, trace.sweeps, trace)
        if not changed:
            break
    return st.profile(g), trace


def solve(g: MatchingGame, order: Optional[List[int]] = None, eps=None):
    """Algorithm 1, Algorithm 2, then independent verification.

    Returns (profile, report, trace).  The intermediate profile must pass the
    external check at eps (a solver bug otherwise); the final report checks
    external stability at 2*eps -- the guarantee the equilibrium sweeps
    preserve -- and per-couple constrained-equilibrium residuals at eps.
    """
    from . import verify  # local import to keep the verifier decoupled

    eps = g.epsilon if eps is None else eps
    pi1, trace1 = propose_dispose(g, order, eps)
    r1 = verify.external_stability(g, pi1, eps)
    if not r1.externally_stable:
        raise EngineError(
            f"propose-dispose output failed verification: {r1.blocking_pairs}", trace1
        )
    pi2, trace2 = stabilize(g, pi1, eps)
    report = verify.full_report(g, pi2, eps)
    trace = EngineTrace(
        events=trace1.events + trace2.events,
        iterations=trace1.iterations,
        sweeps=trace2.sweeps,
        rounds=trace2.rounds,
        round_sweeps=trace2.round_sweeps,
        iteration_cap=trace1.iteration_cap,
        sweep_cap=trace2.sweep_cap,
        converged=trace2.converged,
    )
    return pi2, report, trace
