"""Independent stability verification and brute-force oracles.

This module is the acceptance authority for solver outputs.  It shares no
solution-construction code with the engine: blocking decisions come from its
own per-class payoff geometry, deviation checks are one-sided LPs over the
raw matrices, and the grid scanner is a third, purely enumerative route.

Strict inequalities from the blocking-pair definition are tested as
"> + 1e-9" so float boundaries cannot flap; the grid oracle carries the same
slack.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from . import engine as _engine
from . import linprog, repeated as _repeated
from .core import (
    CompetitiveGame,
    MatchingGame,
    MatchingProfile,
    MixedAssignment,
    RepeatedAssignment,
    RepeatedGame,
    TransferAssignment,
    TransferGame,
    ZeroSumGame,
)
from .competitive import kernel_of
from .linprog import EQ, GE, LE, MAX_, MIN_, FLOAT, RATIONAL, LinearProgram

SLACK = 1e-9


@dataclass
class StabilityReport:
    """Verifier verdict: blocking pairs, IRP violations, per-couple residuals."""

    eps: float
    external_eps: float
    externally_stable: bool = True
    blocking_pairs: List[tuple] = field(default_factory=list)  # (i, j, payoff pair, margin)
    irp_violations: List[tuple] = field(default_factory=list)  # (side, index, payoff, irp)
    internally_stable: Optional[bool] = None
    cne_residuals: dict = field(default_factory=dict)  # (i, j) -> (man_gain, woman_gain)
    tolerance: float = SLACK

    @property
    def green(self) -> bool:
        return (
            self.externally_stable
            and not self.irp_violations
            and (self.internally_stable is not False)
        )


# ---------------------------------------------------------------------------
# Per-class blocking margins: max over profiles of min(U - (u+eps), V - (v+eps))
# ---------------------------------------------------------------------------


def _margin_one_dim(lo_level, hi_level, man_of, woman_of, a, b):
    """Max-min margin when both payoffs are monotone affine in one level."""
    # man_of increasing, woman_of decreasing; the min is maximized where the
    # two shortfalls cross, clamped to the feasible level range
    f = lambda ell: min(man_of(ell) - a, woman_of(ell) - b)
    # ternary structure: evaluate crossing analytically via bisection-free algebra
    # man_of(l) - a = woman_of(l) - b is linear; solve numerically-safe:
    span = hi_level - lo_level
    if span <= 0:
        return f(lo_level), lo_level
    g = lambda ell: (man_of(ell) - a) - (woman_of(ell) - b)
    glo, ghi = g(lo_level), g(hi_level)
    if glo >= 0:
        ell = lo_level
    elif ghi <= 0:
        ell = hi_level
    else:
        ell = lo_level + span * (-glo) / (ghi - glo)
    return f(ell), ell


def blocking_margin(game, u_i, v_j, eps) -> Tuple[float, tuple]:
    """Exact blocking margin of an unmatched pair and a witness payoff pair."""
    a, b = float(u_i) + float(eps), float(v_j) + float(eps)
    if isinstance(game, ZeroSumGame):
        mn, mx = float(game.A.min()), float(game.A.max())
        m, ell = _margin_one_dim(mn, mx, lambda l: l, lambda l: -l, a, b)
        return m, (ell, -ell)
    if isinstance(game, CompetitiveGame):
        k = kernel_of(game.A, game.B)
        mn, mx = k.level_range()
        m, ell = _margin_one_dim(mn, mx, k.man_payoff, k.woman_payoff, a, b)
        return m, (k.man_payoff(ell), k.woman_payoff(ell))
    if isinstance(game, TransferGame):
        surplus = game.a + game.b - a - b
        m = surplus / 2.0
        return m, (a + m, b + m)
    if isinstance(game, RepeatedGame):
        # max t with both hull coordinates >= threshold + t
        cells = list(game.cells())
        n = len(cells)
        avec = [float(p[0]) for _, p in cells]
        bvec = [float(p[1]) for _, p in cells]
        lp = LinearProgram(objective=[0] * n + [1], sense=MAX_)
        lp.bounds = [(0, None)] * n + [(None, None)]
        lp.add(avec + [-1], GE, a)
        lp.add(bvec + [-1], GE, b)
        lp.add([1] * n + [0], EQ, 1)
        sol = linprog.solve(lp, FLOAT)
        if not sol.optimal:
            # infeasible only when even the best margin is -inf on one axis
            return -float("inf"), (float("nan"), float("nan"))
        t = sol.value
        lam = np.asarray(sol.point[:n])
        return t, (float(lam @ avec), float(lam @ bvec))
    raise TypeError(f"unknown game {type(game).__name__}")


def external_stability(g: MatchingGame, pi: MatchingProfile, eps=None) -> StabilityReport:
    """Check IRP floors (exact) and the absence of eps-blocking pairs."""
    eps = g.epsilon if eps is None else eps
    report = StabilityReport(eps=float(eps), external_eps=float(eps))
    # IRP clause doubles as the empty-player blocking test, so it carries the
    # same eps: an agent parked up to eps below the single option does not block
    for i in range(g.men):
        if float(pi.u[i]) < float(g.irp_men[i]) - float(eps) - SLACK:
            report.irp_violations.append(("man", i, pi.u[i], g.irp_men[i]))
    for j in range(g.women):
        if float(pi.v[j]) < float(g.irp_women[j]) - float(eps) - SLACK:
            report.irp_violations.append(("woman", j, pi.v[j], g.irp_women[j]))
    matched = set(pi.matched_pairs())
    for i in range(g.men):
        for j in range(g.women):
            if (i, j) in matched:
                continue
            m, witness = blocking_margin(g.game(i, j), pi.u[i], pi.v[j], eps)
            if m > SLACK:
                report.blocking_pairs.append((i, j, witness, m))
    report.externally_stable = not report.blocking_pairs and not report.irp_violations
    return report


# ---------------------------------------------------------------------------
# Internal stability: one-sided best responses with participation constraints
# ---------------------------------------------------------------------------


def _one_sided_lp(payoff_vec, partner_vec, partner_floor) -> Optional[float]:
    """max p.x s.t. q.x >= floor over the simplex; None when infeasible."""
    n = len(payoff_vec)
    lp = LinearProgram(objective=list(payoff_vec), sense=MAX_)
    lp.add(list(partner_vec), GE, partner_floor)
    lp.add([1] * n, EQ, 1)
    sol = linprog.solve(lp, FLOAT)
    return sol.value if sol.optimal else None


def _bimatrix_gains(A, B, asg: MixedAssignment, u_cur, v_cur, oo, eps):
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    x, y = asg.x.as_array(), asg.y.as_array()
    best_u = _one_sided_lp(A @ y, B @ y, float(oo.v_eps) - eps)
    best_v = _one_sided_lp(x @ B, x @ A, float(oo.u_eps) - eps)
    gain_u = max(0.0, best_u - float(u_cur)) if best_u is not None else 0.0
    gain_v = max(0.0, best_v - float(v_cur)) if best_v is not None else 0.0
    return gain_u, gain_v


def _transfer_gains(game: TransferGame, asg: TransferAssignment, u_cur, v_cur, oo, eps):
    x, y = asg.x, asg.y
    x_min = max(0.0, float(oo.v_eps) - eps - game.b + y)
    best_u = game.a - x_min + y
    y_min = max(0.0, float(oo.u_eps) - eps - game.a + x)
    best_v = game.b + x - y_min
    return max(0.0, best_u - float(u_cur)), max(0.0, best_v - float(v_cur))


def _repeated_ok(game: RepeatedGame, asg: RepeatedAssignment, oo, eps) -> bool:
    """Payoff-level characterization of repeated-couple internal stability."""
    tol = Fraction(1, 10**9)
    eps = Fraction(eps)
    u_eps, v_eps = Fraction(oo.u_eps), Fraction(oo.v_eps)
    ub, vb = asg.sigma.limit_payoff
    if ub < u_eps - eps - tol or vb < v_eps - eps - tol:
        return False
    alpha, beta, _, _ = linprog.minmax_levels(game.A, game.B, RATIONAL)
    cells = list(game.cells())
    n = len(cells)
    avec = [p[0] for _, p in cells]
    bvec = [p[1] for _, p in cells]

    def feasible(rows):
        lp = LinearProgram(objective=[0] * n, sense=MIN_)
        for coeffs, rel, rhs in rows:
            lp.add(coeffs, rel, rhs)
        lp.add([1] * n, EQ, 1)
        return linprog.solve(lp, RATIONAL).optimal

    inter = feasible([
        (avec, GE, max(alpha, u_eps - eps)),
        (bvec, GE, max(beta, v_eps - eps)),
    ])
    if inter:
        # a deviator caught by punishment still pockets at most eps
        return ub >= alpha - eps - tol and vb >= beta - eps - tol
    if u_eps - eps >= alpha:
        # woman ignored: only extremality (within eps) removes her deviations
        lp = LinearProgram(objective=bvec, sense=MAX_)
        lp.add(avec, GE, u_eps - eps)
        lp.add([1] * n, EQ, 1)
        maxv = Fraction(linprog.solve(lp, RATIONAL).value)
        return vb >= maxv - eps - tol and ub >= alpha - eps - tol
    lp = LinearProgram(objective=avec, sense=MAX_)
    lp.add(bvec, GE, v_eps - eps)
    lp.add([1] * n, EQ, 1)
    maxu = Fraction(linprog.solve(lp, RATIONAL).value)
    return ub >= maxu - eps - tol and vb >= beta - eps - tol


def internal_stability(g: MatchingGame, pi: MatchingProfile, eps=None) -> StabilityReport:
    """Per-couple eps-constrained-equilibrium check against fresh outside options."""
    eps = g.epsilon if eps is None else eps
    report = StabilityReport(eps=float(eps), external_eps=float(eps))
    ok = True
    for i, j in pi.matched_pairs():
        oo = _engine.outside_options(g, pi, i, j, eps)
        game = g.game(i, j)
        asg = pi.assignments[(i, j)]
        if isinstance(game, ZeroSumGame):
            gains = _bimatrix_gains(game.A, -game.A, asg, pi.u[i], pi.v[j], oo, float(eps))
        elif isinstance(game, CompetitiveGame):
            gains = _bimatrix_gains(game.A, game.B, asg, pi.u[i], pi.v[j], oo, float(eps))
        elif isinstance(game, TransferGame):
            gains = _transfer_gains(game, asg, pi.u[i], pi.v[j], oo, float(eps))
        else:
            good = _repeated_ok(game, asg, oo, eps)
            gains = (0.0, 0.0) if good else (float("inf"), float("inf"))
        report.cne_residuals[(i, j)] = gains
        if gains[0] > float(eps) + SLACK or gains[1] > float(eps) + SLACK:
            ok = False
    report.internally_stable = ok
    return report


def full_report(g: MatchingGame, pi: MatchingProfile, eps=None) -> StabilityReport:
    """Final verdict for a solved profile.

    External stability is certified at 2*eps (the level the equilibrium
    sweeps provably preserve; each couple's value never drops more than
    2*eps below an outside option), internal residuals at eps.
    """
    eps = g.epsilon if eps is None else eps
    ext = external_stability(g, pi, 2 * eps)
    ext.external_eps = float(2 * eps)
    ext.eps = float(eps)
    internal = internal_stability(g, pi, eps)
    ext.internally_stable = internal.internally_stable
    ext.cne_residuals = internal.cne_residuals
    return ext


# ---------------------------------------------------------------------------
# Grid brute force (the oracle external_stability is validated against)
# ---------------------------------------------------------------------------


def simplex_grid(dim: int, resolution: float) -> np.ndarray:
    """All grid points of the probability simplex with the given spacing."""
    k = max(1, round(1.0 / resolution))
    points = []
    for comp in itertools.combinations(range(k + dim - 1), dim - 1):
        prev = -1
        parts = []
        for c in comp:
            parts.append(c - prev - 1)
            prev = c
        parts.append(k + dim - 2 - prev)
        points.append(parts)
    return np.asarray(points, dtype=float) / k


def _pair_margin_grid(game, u_i, v_j, eps, resolution) -> float:
    a, b = float(u_i) + float(eps), float(v_j) + float(eps)
    if isinstance(game, (ZeroSumGame, CompetitiveGame)):
        A = np.asarray(game.A, dtype=float)
        B = -A if isinstance(game, ZeroSumGame) else np.asarray(game.B, dtype=float)
        X = simplex_grid(A.shape[0], resolution)
        Y = simplex_grid(A.shape[1], resolution)
        best = -np.inf
        for start in range(0, X.shape[0], 512):
            xs = X[start:start + 512]
            U = xs @ A @ Y.T
            V = xs @ B @ Y.T
            best = max(best, float(np.minimum(U - a, V - b).max()))
        return best
    if isinstance(game, TransferGame):
        cap = abs(game.a) + abs(game.b) + abs(a) + abs(b) + 2.0
        k = max(1, round(1.0 / resolution))
        t = np.linspace(-cap, cap, int(2 * cap * k) + 1)
        return float(np.minimum((game.a + t) - a, (game.b - t) - b).max())
    if isinstance(game, RepeatedGame):
        cells = list(game.cells())
        avec = np.asarray([float(p[0]) for _, p in cells])
        bvec = np.asarray([float(p[1]) for _, p in cells])
        lam = simplex_grid(len(cells), resolution)
        return float(np.minimum(lam @ avec - a, lam @ bvec - b).max())
    raise TypeError(f"unknown game {type(game).__name__}")


def brute_force_blocking(g: MatchingGame, pi: MatchingProfile, eps=None,
                         resolution: float = 1e-2) -> List[tuple]:
    """Exhaustive grid scan for blocking pairs; margins above the float slack.

    Intended for small instances (action sets up to 4, a handful of agents).
    The grid underestimates true margins by at most a Lipschitz term of order
    (matrix span) * resolution, so verdicts match external_stability whenever
    margins clear that band.
    """
    eps = g.epsilon if eps is None else eps
    matched = set(pi.matched_pairs())
    found = []
    for i in range(g.men):
        for j in range(g.women):
            if (i, j) in matched:
                continue
            m = _pair_margin_grid(g.game(i, j), pi.u[i], pi.v[j], eps, resolution)
            if m > SLACK:
                found.append((i, j, m))
    return found
