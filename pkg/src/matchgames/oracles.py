"""Per-game-class capability bundles consumed by the engine.

Every class answers the same four questions in real payoff units: the man's
best offer against a woman's payoff floor (propose), the woman's best payoff
against a man's reservation (bid), the man's optimum with the woman held at
a settlement level (settle), and a constrained Nash equilibrium for a pair
of outside options (cne).  Results carry the payoff pair and the strategy
assignment realizing it.  Oracles memoize per-couple structure (kernel maps,
punishment levels, hulls), which the engine hits with many repeated floors.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import (
    NoFeasibleAgreement,
    CompetitiveGame,
    ContractViolation,
    CoupleGame,
    MatchingGame,
    MixedAssignment,
    RepeatedAssignment,
    RepeatedGame,
    StrategyAssignment,
    TransferAssignment,
    TransferGame,
    ZeroSumGame,
)
from . import competitive, repeated, transfers, zerosum


@dataclass(frozen=True)
class Offer:
    u: object  # man's payoff (float or Fraction)
    v: object  # woman's payoff
    assignment: StrategyAssignment


class ZeroSumOracle:
    def __init__(self, game: ZeroSumGame, irp_i: float, irp_j: float):
        self.A = game.A
        self.irp_i = irp_i
        self.irp_j = irp_j

    def propose(self, v_floor, eps) -> Optional[Offer]:
        res = zerosum.proposal_value(self.A, float(v_floor), float(eps))
        if res is None:
            return None
        u, x, y = res
        return Offer(u, -u, MixedAssignment(x, y))

    def bid(self, reservation) -> Optional[Offer]:
        res = zerosum.bid(self.A, float(reservation))
        if res is None:
            return None
        lam, x, y = res
        return Offer(-lam, lam, MixedAssignment(x, y))

    def settle(self, level) -> Offer:
        u, x, y = zerosum.settle(self.A, float(level))
        return Offer(u, -u, MixedAssignment(x, y))

    def cne(self, u_eps, v_eps, eps, current=None) -> Offer:
        u, v = float(u_eps), -float(v_eps)
        try:
            x, y, lvl = zerosum.cne(self.A, u, v, float(eps))
        except NoFeasibleAgreement:
            x, y, lvl = zerosum.clamped_level(
                self.A, u, v, float(eps),
                float(self.irp_i) - 2 * float(eps), -(float(self.irp_j) - 2 * float(eps)),
            )
        return Offer(lvl, -lvl, MixedAssignment(x, y))

    def max_woman_payoff(self) -> float:
        return -float(self.A.min())

    def payoff_span(self) -> float:
        return float(self.A.max() - self.A.min())


class CompetitiveOracle:
    def __init__(self, game: CompetitiveGame, irp_i: float, irp_j: float):
        self.A, self.B = game.A, game.B
        self.kernel = competitive.kernel_of(game.A, game.B)  # validates the class
        self.irp_i = irp_i
        self.irp_j = irp_j

    def propose(self, v_floor, eps) -> Optional[Offer]:
        res = competitive.proposal_value(self.A, self.B, float(v_floor), float(eps))
        if res is None:
            return None
        u, v, x, y = res
        return Offer(u, v, MixedAssignment(x, y))

    def bid(self, reservation) -> Optional[Offer]:
        res = competitive.bid_value(self.A, self.B, float(reservation))
        if res is None:
            return None
        lam, u, x, y = res
        return Offer(u, lam, MixedAssignment(x, y))

    def settle(self, level) -> Offer:
        u, v, x, y = competitive.settle(self.A, self.B, float(level))
        return Offer(u, v, MixedAssignment(x, y))

    def cne(self, u_eps, v_eps, eps, current=None) -> Offer:
        try:
            x, y, (u, v) = competitive.cne_competitive(
                self.A, self.B, float(u_eps), float(v_eps), float(eps)
            )
            return Offer(u, v, MixedAssignment(x, y))
        except NoFeasibleAgreement:
            k = self.kernel
            eps_f = float(eps)
            u_k, v_k = competitive.transform_outside_options(
                k.map, float(u_eps), float(v_eps), eps_f
            )
            floor = (float(self.irp_i) - 2 * eps_f - k.man_off) / k.man_scale
            cap = (-(float(self.irp_j) - 2 * eps_f) - k.woman_off) / k.woman_scale
            x, y, lvl = zerosum.clamped_level(k.Z, u_k, v_k, eps_f, floor, cap)
            return Offer(k.man_payoff(lvl), k.woman_payoff(lvl), MixedAssignment(x, y))

    def max_woman_payoff(self) -> float:
        k = self.kernel
        return max(k.woman_payoff(k.level_range()[0]), k.woman_payoff(k.level_range()[1]))

    def payoff_span(self) -> float:
        k = self.kernel
        mn, mx = k.level_range()
        return max(k.man_scale, k.woman_scale) * (mx - mn)


class TransferOracle:
    def __init__(self, game: TransferGame, irp_i: float, irp_j: float):
        self.a, self.b = float(game.a), float(game.b)
        self.irp_i = irp_i
        self.irp_j = irp_j

    def _assign(self, target_v: float) -> TransferAssignment:
        x, y = transfers.split_transfers(self.b, target_v)
        return TransferAssignment(x, y)

    def propose(self, v_floor, eps) -> Optional[Offer]:
        v = float(v_floor) + float(eps)
        return Offer(self.a + self.b - v, v, self._assign(v))

    def bid(self, reservation) -> Optional[Offer]:
        lam = self.a + self.b - float(reservation)
        return Offer(float(reservation), lam, self._assign(lam))

    def settle(self, level) -> Offer:
        v = float(level)
        return Offer(self.a + self.b - v, v, self._assign(v))

    def cne(self, u_eps, v_eps, eps, current=None) -> Offer:
        cur = (current.x, current.y) if isinstance(current, TransferAssignment) else (0.0, 0.0)
        inst = transfers.TransferInstance(
            [[self.a]], [[self.b]], (self.irp_i,), (self.irp_j,)
        )
        asg = transfers.cne_transfer(inst, 0, 0, float(u_eps), float(v_eps), cur, float(eps))
        return Offer(self.a - asg.x + asg.y, self.b + asg.x - asg.y, asg)

    def max_woman_payoff(self) -> float:
        # transfers are unbounded; a rational man never pays past his IRP
        return self.a + self.b - float(self.irp_i)

    def payoff_span(self) -> float:
        return max(0.0, self.a + self.b - float(self.irp_i) - float(self.irp_j))


class RepeatedOracle:
    def __init__(self, game: RepeatedGame, irp_i, irp_j):
        self.game = game
        self.irp_i = Fraction(irp_i)
        self.irp_j = Fraction(irp_j)
        self._sets = None
        self._mirror = None
        self._memo = {}

    def sets(self) -> repeated.PayoffSets:
        if self._sets is None:
            self._sets = repeated.payoff_sets(self.game)
        return self._sets

    def propose(self, v_floor, eps) -> Optional[Offer]:
        floor = Fraction(v_floor) + Fraction(eps)
        key = ("p", floor)
        if key not in self._memo:
            res = repeated.min_v_at_max_u(self.game, floor)
            if res is None:
                self._memo[key] = None
            else:
                u, v, _ = res
                sig = repeated.achieve_payoff(self.game, (u, v))
                self._memo[key] = Offer(u, v, RepeatedAssignment(sig))
        return self._memo[key]

    def bid(self, reservation) -> Optional[Offer]:
        res = Fraction(reservation)
        key = ("b", res)
        if key not in self._memo:
            if self._mirror is None:
                self._mirror = RepeatedGame(self.game.B, self.game.A)
            out = repeated.min_v_at_max_u(self._mirror, res)
            if out is None:
                self._memo[key] = None
            else:
                lam, u, _ = out
                sig = repeated.achieve_payoff(self.game, (u, lam))
                self._memo[key] = Offer(u, lam, RepeatedAssignment(sig))
        return self._memo[key]

    def settle(self, level) -> Offer:
        cap = self.max_woman_payoff()
        res = repeated.min_v_at_max_u(self.game, min(Fraction(level), cap))
        u, v, _ = res
        sig = repeated.achieve_payoff(self.game, (u, v))
        return Offer(u, v, RepeatedAssignment(sig))

    def cne(self, u_eps, v_eps, eps, current=None) -> Offer:
        cur = current.sigma if isinstance(current, RepeatedAssignment) else None
        sig = repeated.cne_repeated(
            self.game, Fraction(u_eps), Fraction(v_eps), Fraction(eps), cur
        )
        u, v = sig.limit_payoff
        return Offer(u, v, RepeatedAssignment(sig))

    def max_woman_payoff(self):
        return max(b for row in self.game.B for b in row)

    def payoff_span(self) -> float:
        amax = max(a for row in self.game.A for a in row)
        amin = min(a for row in self.game.A for a in row)
        bmax = max(b for row in self.game.B for b in row)
        bmin = min(b for row in self.game.B for b in row)
        return float(max(amax - amin, bmax - bmin))


_ORACLES = {
    "zero_sum": ZeroSumOracle,
    "strictly_competitive": CompetitiveOracle,
    "repeated": RepeatedOracle,
    "transfer": TransferOracle,
}


class OracleTable:
    """Lazily built per-couple oracle cache for one market."""

    def __init__(self, g: MatchingGame):
        self.g = g
        self._cache = {}

    def __call__(self, i: int, j: int):
        key = (i, j)
        if key not in self._cache:
            cls = _ORACLES[self.g.game_class]
            self._cache[key] = cls(self.g.game(i, j), self.g.irp_men[i], self.g.irp_women[j])
        return self._cache[key]
