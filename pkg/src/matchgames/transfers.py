"""Linear-transfer couples: closed forms for the auction subproblems,
deferred acceptance for the no-commitment solution, and the transfer-game
constrained Nash equilibrium.

A couple (i, j) has fixed base utilities a = A[i][j], b = B[i][j] and plays
U = a - x + y, V = b + x - y over nonnegative transfers, so every subproblem
is one-dimensional in the net transfer.  Transfer normalization follows the
auction trace conventions: the proposer pays nothing when possible during
propose-dispose, and receivers keep the minimal incoming transfer after the
equilibrium reduction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import ContractViolation, TransferAssignment

TOL = 1e-9


@dataclass
class TransferInstance:
    """Base-utility matrices plus IRPs for a pure transfer market."""

    A: np.ndarray  # men's fixed utilities, men x women
    B: np.ndarray  # women's fixed utilities
    irp_men: tuple
    irp_women: tuple

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.B = np.asarray(self.B, dtype=float)
        if self.A.shape != self.B.shape:
            raise ContractViolation("A and B must have equal shapes")
        if not (np.isfinite(self.A).all() and np.isfinite(self.B).all()):
            raise ContractViolation("base utilities must be finite")

    @property
    def men(self) -> int:
        return self.A.shape[0]

    @property
    def women(self) -> int:
        return self.A.shape[1]


def split_transfers(base_v: float, target_v: float) -> Tuple[float, float]:
    """Nonnegative (x, y) giving the woman exactly target_v, minimal transfers."""
    net = target_v - base_v  # x - y
    if net >= 0:
        return net, 0.0
    return 0.0, -net


def optimal_proposal(inst: TransferInstance, i: int, current_v: Sequence[float],
                     eps: float) -> Tuple[Optional[int], float, float, float]:
    """Best proposal of man i against current women payoffs.

    Returns (j, x, y, u); j is None when the empty option dominates every
    woman.  The proposer pushes the woman exactly to her payoff + eps and
    keeps the whole surplus; ties go to the lowest woman index.
    """
    best_j, best_val = None, float(inst.irp_men[i])
    for j in range(inst.women):
        val = float(inst.A[i, j] + inst.B[i, j]) - float(current_v[j]) - eps
        if val > best_val + TOL:
            best_j, best_val = j, val
    if best_j is None:
        return None, 0.0, 0.0, float(inst.irp_men[i])
    x, y = split_transfers(float(inst.B[i, best_j]), float(current_v[best_j]) + eps)
    return best_j, x, y, best_val


def bid_value(inst: TransferInstance, i: int, j: int, beta: float) -> float:
    """Man i's bid for j: her best payoff while he keeps his reservation."""
    return float(inst.A[i, j] + inst.B[i, j]) - beta


def bid_and_settle(inst: TransferInstance, i: int, i_prime: int, j: int,
                   beta_i: float, beta_i_prime: float):
    """Second-price competition of proposer i vs incumbent i_prime for j.

    Returns (winner, x, y, u, v) with the winner's transfers pinning the
    woman at the loser's bid; equal bids keep the incumbent.  None when
    neither bid clears the woman's current payoff (proposal rejected).
    """
    lam_i = bid_value(inst, i, j, beta_i)
    lam_ip = bid_value(inst, i_prime, j, beta_i_prime)
    if lam_i > lam_ip + TOL:
        winner, lam_loser = i, lam_ip
    else:
        winner, lam_loser = i_prime, lam_i
    x, y = split_transfers(float(inst.B[winner, j]), lam_loser)
    u = float(inst.A[winner, j]) - x + y
    return winner, x, y, u, lam_loser


def nash_stable_matching(inst: TransferInstance):
    """Men-proposing deferred acceptance on the ordinal preferences of A and B.

    No transfers are made: the only couple-level equilibrium of the transfer
    game is zero transfers, so stability reduces to Gale-Shapley over the
    base utilities with IRP screening (women need strictly more than their
    current holding to switch).  Returns (mu, u, v).
    """
    mu = {}
    holder = [None] * inst.women  # current partner per woman
    v = [float(w) for w in inst.irp_women]
    queue = list(range(inst.men))
    rejected = [set() for _ in range(inst.men)]
    while queue:
        i = queue.pop(0)
        candidates = [
            j for j in range(inst.women)
            if j not in rejected[i]
            and inst.A[i, j] >= inst.irp_men[i] - TOL
            and inst.B[i, j] > v[j] + TOL
        ]
        if not candidates:
            mu[i] = None
            continue
        j = max(candidates, key=lambda jj: (inst.A[i, jj], -jj))
        if holder[j] is not None:
            loser = holder[j]
            rejected[loser].add(j)
            mu[loser] = None
            queue.append(loser)
        holder[j] = i
        v[j] = float(inst.B[i, j])
        mu[i] = j
    u = [float(inst.A[i, j]) if j is not None else float(inst.irp_men[i])
         for i, j in sorted(mu.items())]
    v_out = [float(inst.B[holder[j], j]) if holder[j] is not None else float(inst.irp_women[j])
             for j in range(inst.women)]
    return mu, tuple(u), tuple(v_out)


def cne_transfer(inst: TransferInstance, i: int, j: int, u_eps: float, v_eps: float,
                 current: Tuple[float, float], eps: float) -> TransferAssignment:
    """Reduce incoming transfers until each partner holds their outside option.

    The woman's transfer drops first (pinning the man at u_eps), then the
    man's (pinning her at v_eps), each clamped at zero; with one-sided
    transfers this is the unique equilibrium reduction and is idempotent.
    """
    a, b = float(inst.A[i, j]), float(inst.B[i, j])
    x, _ = current
    y_new = max(0.0, u_eps - a + x)
    x_new = max(0.0, v_eps - b + y_new)
    return TransferAssignment(x_new, y_new)
