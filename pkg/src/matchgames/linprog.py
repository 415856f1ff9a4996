"""Self-contained dense LP kernel used by every game-class oracle.

Two-phase primal simplex with Bland's rule, in either float64 or exact
``Fraction`` arithmetic.  Instances here are tiny (tens of variables), so
determinism and exactness win over speed: entering variable is always the
lowest-index improving column, ratio ties leave by lowest variable index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import ContractViolation, MixedStrategy

FLOAT = "float"
RATIONAL = "rational"

MAX_ = "max"
MIN_ = "min"

LE, GE, EQ = "<=", ">=", "=="

FEAS_TOL = 1e-9

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    """max/min c.x subject to rows (a, rel, b); default variable bounds 0/+inf."""

    objective: Sequence
    sense: str = MAX_
    constraints: List[Tuple[Sequence, str, object]] = field(default_factory=list)
    bounds: Optional[List[Tuple[Optional[object], Optional[object]]]] = None

    def add(self, coeffs, rel, rhs):
        self.constraints.append((list(coeffs), rel, rhs))

    def n_vars(self) -> int:
        return len(self.objective)


@dataclass
class LpSolution:
    status: str
    point: Optional[list] = None
    value: Optional[float] = None
    exact_point: Optional[list] = None  # Fractions, rational mode only

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _check(lp: LinearProgram) -> None:
    n = lp.n_vars()
    for coeffs, rel, _ in lp.constraints:
        if len(coeffs) != n:
            raise ContractViolation("constraint row dimension mismatch")
        if rel not in (LE, GE, EQ):
            raise ContractViolation(f"unknown relation {rel!r}")
    if lp.bounds is not None and len(lp.bounds) != n:
        raise ContractViolation("bounds vector dimension mismatch")


def _to_core(lp: LinearProgram, conv):
    """Reduce to: minimize c.x, rows (a, rel, b), x >= 0.

    Finite lower bounds are shifted away, finite upper bounds become rows,
    free variables are split into positive and negative parts.  Returns
    (c, rows, recover) where recover maps core-space points back to the
    original variables.
    """
    n = lp.n_vars()
    bounds = lp.bounds or [(0, None)] * n
    c = [conv(v) for v in lp.objective]
    if lp.sense == MAX_:
        c = [-v for v in c]
    elif lp.sense != MIN_:
        raise ContractViolation(f"unknown sense {lp.sense!r}")

    rows = [([conv(v) for v in coeffs], rel, conv(rhs)) for coeffs, rel, rhs in lp.constraints]

    # column plan: each original var -> list of (core_index, sign), plus rhs shift
    plan = []
    shift = [conv(0)] * n
    ncore = 0
    extra_rows = []
    for k, (lo, hi) in enumerate(bounds):
        if lo is None:
            plan.append([(ncore, 1), (ncore + 1, -1)])
            ncore += 2
        else:
            lo_c = conv(lo)
            shift[k] = lo_c
            plan.append([(ncore, 1)])
            ncore += 1
        if hi is not None:
            row = [conv(0)] * n
            row[k] = conv(1)
            extra_rows.append((row, LE, conv(hi)))
    rows = rows + extra_rows

    core_c = [conv(0)] * ncore
    core_rows = []
    const_obj = conv(0)
    for k in range(n):
        for idx, sign in plan[k]:
            core_c[idx] += sign * c[k]
        const_obj += c[k] * shift[k]
    for coeffs, rel, rhs in rows:
        row = [conv(0)] * ncore
        b = rhs
        for k in range(n):
            b -= coeffs[k] * shift[k]
            for idx, sign in plan[k]:
                row[idx] += sign * coeffs[k]
        core_rows.append((row, rel, b))

    def recover(xcore):
        out = []
        for k in range(n):
            val = shift[k]
            for idx, sign in plan[k]:
                val = val + sign * xcore[idx]
            out.append(val)
        return out

    return core_c, core_rows, const_obj, recover


def _simplex(c, rows, zero, one, tol):
    """Two-phase simplex on min c.x, rows -> (status, x).

    Pure-python tableau over an arbitrary field (works for float and Fraction).
    """
    m = len(rows)
    n = len(c)

    # equality form with slack/surplus columns, rhs >= 0
    cols = n
    eq_rows = []
    slack_of_row = {}
    for ridx, (a, rel, b) in enumerate(rows):
        a = list(a)
        if b < zero:
            a = [-v for v in a]
            b = -b
            rel = {LE: GE, GE: LE, EQ: EQ}[rel]
        if rel == LE:
            slack_of_row[ridx] = (cols, one)
            cols += 1
        elif rel == GE:
            slack_of_row[ridx] = (cols, -one)
            cols += 1
        eq_rows.append((a, b, rel))

    T = [[zero] * (cols + 1) for _ in range(m)]
    basis = [-1] * m
    art_cols = []
    for ridx, (a, b, rel) in enumerate(eq_rows):
        for k, v in enumerate(a):
            T[ridx][k] = v
        if ridx in slack_of_row:
            col, sgn = slack_of_row[ridx]
            T[ridx][col] = sgn
        T[ridx][-1] = b
        col, sgn = slack_of_row.get(ridx, (None, None))
        if rel == LE:
            basis[ridx] = col  # slack starts basic
        else:
            basis[ridx] = None  # needs artificial

    # append artificial columns where needed
    for ridx in range(m):
        if basis[ridx] is None:
            for row in T:
                row.insert(-1, zero)
            T[ridx][-2] = one
            art_cols.append(cols)
            basis[ridx] = cols
            cols += 1

    def pivot(T, basis, prow, pcol):
        pr = T[prow]
        pv = pr[pcol]
        T[prow] = [v / pv for v in pr]
        pr = T[prow]
        for r, row in enumerate(T):
            if r == prow:
                continue
            f = row[pcol]
            if f != zero:
                T[r] = [rv - f * pv2 for rv, pv2 in zip(row, pr)]
        basis[prow] = pcol

    def run(T, basis, cost, allowed):
        """Minimize cost over the tableau with Bland's rule."""
        while True:
            # reduced costs
            red = list(cost)
            for r, b in enumerate(basis):
                cb = cost[b]
                if cb != zero:
                    red = [rv - cb * tv for rv, tv in zip(red, T[r])]
            enter = -1
            for k in range(cols):
                if k in allowed and red[k] < -tol:
                    enter = k
                    break
            if enter < 0:
                obj = zero
                for r, b in enumerate(basis):
                    obj += cost[b] * T[r][-1]
                return OPTIMAL, obj
            # ratio test, Bland tie-break on basis variable index
            best = None
            for r in range(m):
                a = T[r][enter]
                if a > tol:
                    ratio = T[r][-1] / a
                    if best is None or ratio < best[0] - tol or (
                        abs(ratio - best[0]) <= tol and basis[r] < basis[best[1]]
                    ):
                        best = (ratio, r)
            if best is None:
                return UNBOUNDED, None
            pivot(T, basis, best[1], enter)

    allowed = set(range(cols))
    if art_cols:
        cost1 = [zero] * (cols + 1)
        for k in art_cols:
            cost1[k] = one
        status, obj = run(T, basis, cost1, allowed)
        if status != OPTIMAL or obj > tol:
            return INFEASIBLE, None
        # drive artificials out of the basis where possible; drop them
        for r in range(m):
            if basis[r] in art_cols:
                piv = -1
                for k in range(cols):
                    if k not in art_cols and abs(T[r][k]) > tol:
                        piv = k
                        break
                if piv >= 0:
                    pivot(T, basis, r, piv)
        allowed -= set(art_cols)

    cost2 = [zero] * (cols + 1)
    for k in range(n):
        cost2[k] = c[k]
    status, obj = run(T, basis, cost2, allowed)
    if status != OPTIMAL:
        return status, None

    x = [zero] * cols
    for r, b in enumerate(basis):
        x[b] = T[r][-1]
    return OPTIMAL, x[:n]


def solve(lp: LinearProgram, mode: str = FLOAT) -> LpSolution:
    """Solve an LP; rational mode requires Fraction-coercible data and is exact."""
    _check(lp)
    if mode == FLOAT:
        conv = float
        zero, one, tol = 0.0, 1.0, FEAS_TOL
    elif mode == RATIONAL:
        conv = Fraction
        zero, one, tol = Fraction(0), Fraction(1), Fraction(0)
    else:
        raise ContractViolation(f"unknown mode {mode!r}")

    c, rows, const_obj, recover = _to_core(lp, conv)
    status, xcore = _simplex(c, rows, zero, one, tol)
    if status != OPTIMAL:
        return LpSolution(status)
    x = recover(xcore)
    value = const_obj + sum(ck * xk for ck, xk in zip(c, xcore))
    if lp.sense == MAX_:
        value = -value
    if mode == RATIONAL:
        return LpSolution(OPTIMAL, [float(v) for v in x], value, list(x))
    return LpSolution(OPTIMAL, list(x), value)


# ---------------------------------------------------------------------------
# Matrix-game helpers
# ---------------------------------------------------------------------------


def _value_lp_y(A, mode):
    """min z s.t. Ay <= z*1, sum y = 1, y >= 0: minimizer column strategy."""
    A = [[v for v in row] for row in A]
    m, n = len(A), len(A[0])
    lp = LinearProgram(objective=[0] * n + [1], sense=MIN_)
    lp.bounds = [(0, None)] * n + [(None, None)]
    for s in range(m):
        lp.add(list(A[s]) + [-1], LE, 0)
    lp.add([1] * n + [0], EQ, 1)
    sol = solve(lp, mode)
    if not sol.optimal:
        raise ContractViolation("matrix-game LP did not solve")
    pts = sol.exact_point if mode == RATIONAL else sol.point
    return sol.value, pts[:n]


def game_value(A, mode: str = FLOAT):
    """Value and saddle strategies of the zero-sum matrix game xAy.

    The row player maximizes.  Returns (w, x_star, y_star) certifying
    x A y* <= w <= x* A y for every x and y.
    """
    A = np.asarray(A, dtype=float).tolist() if mode == FLOAT else [
        [Fraction(v) for v in row] for row in A
    ]
    w, y_star = _value_lp_y(A, mode)
    # row side: value of the transposed game for the minimizing opponent
    negAT = [[-A[s][t] for s in range(len(A))] for t in range(len(A[0]))]
    w2, x_star = _value_lp_y(negAT, mode)
    wx = -w2
    if mode == FLOAT and abs(wx - w) > 1e-7:
        raise ContractViolation("primal/dual game values disagree")
    return w, MixedStrategy.of(tuple(x_star)), MixedStrategy.of(tuple(y_star))


def minmax_levels(A, B, mode: str = FLOAT):
    """Punishment levels: alpha = min_y max_x xAy, beta = min_x max_y xBy.

    Also returns the punishing strategies (the opponent's minimizing mixture).
    """
    if np.asarray(A, dtype=float).shape != np.asarray(B, dtype=float).shape:
        raise ContractViolation("A and B must have equal shapes")
    if mode == RATIONAL:
        A = [[Fraction(v) for v in row] for row in A]
        B = [[Fraction(v) for v in row] for row in B]
    alpha, y_pun = _value_lp_y(A, mode)
    BT = [[B[s][t] for s in range(len(B))] for t in range(len(B[0]))]
    beta, x_pun = _value_lp_y(BT, mode)
    return alpha, beta, MixedStrategy.of(tuple(y_pun)), MixedStrategy.of(tuple(x_pun))
