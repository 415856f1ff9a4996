"""Game-class oracle for bi-matrix zero-sum couples.

Level solves (find x A y = c with one pure side), the proposal / bid /
settle subproblems of the propose-dispose auction, and constrained Nash
equilibria via the median formula.

Convention used throughout: the man's payoff is the bilinear level x A y,
the woman's is its negation.  Where a function takes the woman's threshold
it is expressed as an upper bound on the level (i.e. already negated); the
callers in ``engine``/``competitive`` do that translation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import ContractViolation, MixedStrategy, NoFeasibleAgreement
from .linprog import FLOAT, game_value

TOL = 1e-9


@dataclass(frozen=True)
class LevelSolve:
    """A strategy pair achieving a requested bilinear level, one side pure."""

    x: MixedStrategy
    y: MixedStrategy
    achieved: float


def _two_point(lo: float, hi: float, c: float) -> float:
    """Weight on the high entry so that the mixture equals c."""
    if hi == lo:
        return 0.0
    w = (c - lo) / (hi - lo)
    return min(1.0, max(0.0, w))


def solve_level(A, c: float) -> Optional[LevelSolve]:
    """Strategy pair with x A y = min(c, max A); None when c < min A.

    Returns a pair where at least one side is pure: either a pure row with a
    two-column mixture, or a pure column with a two-row mixture.  Ties are
    broken by lowest index so outputs are deterministic.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    mn, mx = float(A.min()), float(A.max())
    if c < mn - TOL:
        return None
    c = min(c, mx)
    c = max(c, mn)

    # pure row whose entries bracket c -> mix two columns
    for s in range(m):
        row = A[s]
        below = [t for t in range(n) if row[t] <= c + TOL]
        above = [t for t in range(n) if row[t] >= c - TOL]
        if below and above:
            t_lo, t_hi = below[0], above[0]
            w = _two_point(row[t_lo], row[t_hi], c)
            y = [0.0] * n
            y[t_lo] += 1.0 - w
            y[t_hi] += w
            x = MixedStrategy.pure(s, m)
            ys = MixedStrategy.of(y)
            return LevelSolve(x, ys, float(x.as_array() @ A @ ys.as_array()))

    # otherwise every row is entirely above or entirely below c; any column
    # then brackets c across rows -> mix two rows
    col = A[:, 0]
    below = [s for s in range(m) if col[s] <= c + TOL]
    above = [s for s in range(m) if col[s] >= c - TOL]
    if not below or not above:
        raise ContractViolation("level bracketing failed; non-finite matrix?")
    s_lo, s_hi = below[0], above[0]
    w = _two_point(col[s_lo], col[s_hi], c)
    x = [0.0] * m
    x[s_lo] += 1.0 - w
    x[s_hi] += w
    xs = MixedStrategy.of(x)
    y = MixedStrategy.pure(0, n)
    return LevelSolve(xs, y, float(xs.as_array() @ A @ y.as_array()))


def proposal_value(A, v_floor: float, eps: float) -> Optional[Tuple[float, MixedStrategy, MixedStrategy]]:
    """Man's best payoff while giving the woman at least v_floor + eps.

    The woman's payoff -xAy >= v_floor + eps caps the level at
    -(v_floor + eps); None when even min A exceeds that cap (partner
    unreachable).
    """
    target = -(float(v_floor) + float(eps))
    ls = solve_level(A, target)
    if ls is None:
        return None
    return ls.achieved, ls.x, ls.y


def bid(A, reservation: float) -> Optional[Tuple[float, MixedStrategy, MixedStrategy]]:
    """Woman's best payoff subject to the man keeping at least his reservation.

    Minimizes the level subject to level >= reservation; None when the
    reservation exceeds max A (the man cannot bid for this woman).
    """
    A = np.asarray(A, dtype=float)
    if reservation > float(A.max()) + TOL:
        return None
    level = max(float(reservation), float(A.min()))
    ls = solve_level(A, level)
    return -ls.achieved, ls.x, ls.y


def settle(A, woman_level: float) -> Tuple[float, MixedStrategy, MixedStrategy]:
    """Winner's best payoff with the woman held at woman_level.

    The level is clamped into the couple's achievable range (a reserve above
    the woman's best payoff just pins her at that best).
    """
    A = np.asarray(A, dtype=float)
    target = min(max(-float(woman_level), float(A.min())), float(A.max()))
    ls = solve_level(A, target)
    return ls.achieved, ls.x, ls.y


def _tau_search(A, y0: MixedStrategy, y_star: MixedStrategy, target: float):
    """Last point on the segment [y0, y*] where some pure row still attains target.

    Each pure-row payoff is affine in tau, ends strictly below target at y*,
    so only rows starting at or above target produce a crossing.  Returns the
    pure row (lowest index on ties) and the mixed y at the crossing.
    """
    A = np.asarray(A, dtype=float)
    r0 = A @ y0.as_array()
    r1 = A @ y_star.as_array()
    best_tau, best_s = -1.0, -1
    for s in range(A.shape[0]):
        if r0[s] >= target - TOL:
            denom = r0[s] - r1[s]
            tau = 0.0 if denom <= TOL else (r0[s] - target) / denom
            tau = min(1.0, max(0.0, tau))
            if tau > best_tau + TOL:
                best_tau, best_s = tau, s
    if best_s < 0:
        raise ContractViolation("no pure row attains the target level")
    yt = (1.0 - best_tau) * y0.as_array() + best_tau * y_star.as_array()
    return MixedStrategy.pure(best_s, A.shape[0]), MixedStrategy.of(tuple(yt))


def clamped_level(A, u: float, v: float, eps: float,
                  level_floor: float, level_cap: float):
    """Equilibrium level for jointly unreachable outside options.

    When u - eps > v + eps no level satisfies both participation targets,
    but every deviation set is then capped by the other side's unreachable
    threshold: any level z with z >= min(v+eps, max A) - eps (the man cannot
    feasibly top it by more than eps) and z <= max(u-eps, min A) + eps (nor
    can the woman) is an eps-CNE.  ``level_floor``/``level_cap`` additionally
    keep both partners within 2*eps of their single options, which is always
    compatible for a viable couple.  Returns the median level clamped into
    that interval.
    """
    A = np.asarray(A, dtype=float)
    mn, mx = float(A.min()), float(A.max())
    lo = max(min(v + eps, mx) - eps, level_floor, mn)
    hi = min(max(u - eps, mn) + eps, level_cap, mx)
    hi = max(hi, lo)
    median = sorted((u - 2 * eps, game_value(A, FLOAT)[0], v + 2 * eps))[1]
    ls = solve_level(A, min(max(median, lo), hi))
    return ls.x, ls.y, ls.achieved


def cne(A, u: float, v: float, eps: float) -> Tuple[MixedStrategy, MixedStrategy, float]:
    """Constrained Nash equilibrium for outside options (u, v).

    ``u`` is the man's outside option; ``v`` is the woman's, expressed as an
    upper bound on the level (the negation of her own-payoff option).  The
    returned level always equals median{u - 2eps, w, v + 2eps} where w is the
    game value.  Requires a feasibility witness: some level in
    [u - eps, v + eps] inside [min A, max A]; callers that must keep a couple
    matched through an unreachable pair use clamped_level instead.
    """
    A = np.asarray(A, dtype=float)
    u, v, eps = float(u), float(v), float(eps)
    mn, mx = float(A.min()), float(A.max())
    if max(u - eps, mn) > min(v + eps, mx) + TOL:
        raise NoFeasibleAgreement(
            f"no level in [{u - eps}, {v + eps}] within [{mn}, {mx}]"
        )

    w, x_star, y_star = game_value(A, FLOAT)
    lo, hi = u - 2 * eps, v + 2 * eps
    if lo - TOL <= w <= hi + TOL:
        return x_star, y_star, w
    if w < lo:
        ls = solve_level(A, lo)
        x_t, y_t = _tau_search(A, ls.y, y_star, lo)
        achieved = float(x_t.as_array() @ A @ y_t.as_array())
        return x_t, y_t, achieved
    # w > hi: mirror through the woman's game -A^T and swap roles back
    xm, ym, val = cne((-A).T, -v, -u, eps)
    return ym, xm, -val
