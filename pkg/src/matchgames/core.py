"""Domain model shared by all solvers.

Agents, couple games, strategy assignments, matching profiles and payoff
evaluation.  All types are treated as immutable values: solvers never mutate
a profile in place, they build new ones.  Exact rational arithmetic
(``fractions.Fraction``) is used wherever a repeated-game construction needs
it; everything else lives in float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

Number = Union[int, float, Fraction]

SIMPLEX_TOL = 1e-12
CACHE_TOL = 1e-9


class ContractViolation(Exception):
    """A caller broke an operation's precondition (wrong variant, bad shape...)."""


class NoFeasibleAgreement(Exception):
    """No strategy profile satisfies both partners' participation constraints."""


MAN = "man"
WOMAN = "woman"


@dataclass(frozen=True)
class AgentId:
    """One market participant; ``is_empty`` marks the virtual single-option partner."""

    side: str
    index: int
    is_empty: bool = False

    def __post_init__(self):
        if self.side not in (MAN, WOMAN):
            raise ContractViolation(f"unknown side {self.side!r}")
        if self.index < 0 and not self.is_empty:
            raise ContractViolation("negative index for a real agent")

    @staticmethod
    def man(index: int) -> "AgentId":
        return AgentId(MAN, index)

    @staticmethod
    def woman(index: int) -> "AgentId":
        return AgentId(WOMAN, index)

    @staticmethod
    def empty(side: str) -> "AgentId":
        return AgentId(side, -1, True)


@dataclass(frozen=True)
class MixedStrategy:
    """A point of the probability simplex over a finite pure-action set."""

    weights: tuple

    def __post_init__(self):
        w = self.weights
        if len(w) == 0:
            raise ContractViolation("empty strategy support")
        total = sum(w)
        if any(p < -SIMPLEX_TOL for p in w) or abs(total - 1) > max(SIMPLEX_TOL, 1e-12 * len(w)):
            raise ContractViolation(f"not a simplex point: {w}")

    @staticmethod
    def pure(index: int, n: int) -> "MixedStrategy":
        return MixedStrategy(tuple(1.0 if k == index else 0.0 for k in range(n)))

    @staticmethod
    def of(values: Sequence[Number]) -> "MixedStrategy":
        return MixedStrategy(tuple(values))

    def as_array(self) -> np.ndarray:
        return np.asarray([float(p) for p in self.weights])

    def __len__(self) -> int:
        return len(self.weights)


# ---------------------------------------------------------------------------
# Couple games (tagged union)
# ---------------------------------------------------------------------------

ZERO_SUM = "zero_sum"
STRICTLY_COMPETITIVE = "strictly_competitive"
REPEATED = "repeated"
TRANSFER = "transfer"

GAME_CLASSES = (ZERO_SUM, STRICTLY_COMPETITIVE, REPEATED, TRANSFER)


@dataclass
class ZeroSumGame:
    """Bi-matrix zero-sum couple: the woman's payoff is -xAy by construction."""

    A: np.ndarray

    kind = ZERO_SUM

    def __post_init__(self):
        try:
            self.A = np.asarray(self.A, dtype=float)
        except ValueError as e:
            raise ContractViolation(f"ragged payoff matrix: {e}") from e
        if self.A.ndim != 2:
            raise ContractViolation("payoff matrix must be 2-D")


@dataclass
class CompetitiveGame:
    """Strictly competitive couple; (A, -B) must be positive affine variants."""

    A: np.ndarray
    B: np.ndarray

    kind = STRICTLY_COMPETITIVE

    def __post_init__(self):
        try:
            self.A = np.asarray(self.A, dtype=float)
            self.B = np.asarray(self.B, dtype=float)
        except ValueError as e:
            raise ContractViolation(f"ragged payoff matrix: {e}") from e
        if self.A.shape != self.B.shape or self.A.ndim != 2:
            raise ContractViolation("A and B must be 2-D matrices of equal shape")


@dataclass
class RepeatedGame:
    """Infinitely repeated bi-matrix stage game; entries are exact rationals."""

    A: tuple  # tuple of tuples of Fraction
    B: tuple

    kind = REPEATED

    def __post_init__(self):
        self.A = tuple(tuple(Fraction(v) for v in row) for row in self.A)
        self.B = tuple(tuple(Fraction(v) for v in row) for row in self.B)
        widths = {len(r) for r in self.A} | {len(r) for r in self.B}
        if len(self.A) != len(self.B) or len(widths) != 1:
            raise ContractViolation("stage matrices must be rectangular and of equal shape")

    @property
    def shape(self) -> tuple:
        return (len(self.A), len(self.A[0]))

    def cells(self):
        """Yield ((s, t), (a, b)) in lexicographic cell order."""
        for s, row in enumerate(self.A):
            for t, a in enumerate(row):
                yield (s, t), (a, self.B[s][t])


@dataclass
class TransferGame:
    """Linear-transfer couple: U = a - x + y, V = b + x - y with x, y >= 0."""

    a: float
    b: float

    kind = TRANSFER


CoupleGame = Union[ZeroSumGame, CompetitiveGame, RepeatedGame, TransferGame]


# ---------------------------------------------------------------------------
# Strategy assignments (tagged union matching the couple game variant)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MixedAssignment:
    x: MixedStrategy
    y: MixedStrategy


@dataclass(frozen=True)
class TransferAssignment:
    x: float
    y: float

    def __post_init__(self):
        if self.x < -CACHE_TOL or self.y < -CACHE_TOL:
            raise ContractViolation("transfers must be nonnegative")


@dataclass(frozen=True)
class Punishment:
    """Minmax response the partner switches to forever after a deviation."""

    strategy: tuple  # mixed strategy of the punisher, exact rational weights
    level: Fraction  # long-run payoff the deviator is held to


@dataclass(frozen=True)
class RepeatedStrategy:
    """Finite cyclic pure schedule plus punishment annotations.

    ``punish_man`` is the woman's reaction to a deviation by the man (None
    means she ignores deviations), and symmetrically for ``punish_woman``.
    """

    schedule: tuple  # tuple of (s, t) pure action pairs, length N >= 1
    limit_payoff: tuple  # exact (Fraction, Fraction) cycle average
    punish_man: Optional[Punishment] = None
    punish_woman: Optional[Punishment] = None

    def __post_init__(self):
        if len(self.schedule) < 1:
            raise ContractViolation("schedule must have at least one stage")

    @property
    def cycle_length(self) -> int:
        return len(self.schedule)


@dataclass(frozen=True)
class RepeatedAssignment:
    sigma: RepeatedStrategy


StrategyAssignment = Union[MixedAssignment, TransferAssignment, RepeatedAssignment]


# ---------------------------------------------------------------------------
# Market and profiles
# ---------------------------------------------------------------------------


@dataclass
class MatchingGame:
    """The full market: agent counts, per-couple games, IRPs and epsilon.

    Markets are homogeneous in game class (``game_class`` tags every couple).
    ``epsilon`` is a Fraction for repeated markets so schedule constructions
    stay exact.
    """

    men: int
    women: int
    game_class: str
    couples: dict  # (i, j) -> CoupleGame, total over men x women
    irp_men: tuple
    irp_women: tuple
    epsilon: Number

    def __post_init__(self):
        if self.game_class not in GAME_CLASSES:
            raise ContractViolation(f"unknown game class {self.game_class!r}")
        if self.epsilon <= 0:
            raise ContractViolation("epsilon must be positive")
        if len(self.irp_men) != self.men or len(self.irp_women) != self.women:
            raise ContractViolation("IRP vectors must match agent counts")
        for i in range(self.men):
            for j in range(self.women):
                g = self.couples.get((i, j))
                if g is None:
                    raise ContractViolation(f"couples table missing ({i},{j})")
                if g.kind != self.game_class:
                    raise ContractViolation("couple game class does not match market tag")

    def game(self, i: int, j: int) -> CoupleGame:
        return self.couples[(i, j)]


@dataclass
class MatchingProfile:
    """A matching plus per-couple strategies and cached payoffs.

    ``mu[i]`` is the woman matched to man ``i`` or None when he is single
    (matched with the empty player).  Cached payoffs must agree with
    re-evaluation from the assignments within ``CACHE_TOL``; agents matched to
    an empty player carry exactly their IRP.
    """

    mu: dict  # man index -> woman index | None
    assignments: dict  # (i, j) -> StrategyAssignment
    u: tuple  # cached men payoffs
    v: tuple  # cached women payoffs

    def woman_partner(self, j: int) -> Optional[int]:
        for i, jj in self.mu.items():
            if jj == j:
                return i
        return None

    def matched_pairs(self):
        return sorted((i, j) for i, j in self.mu.items() if j is not None)

    def validate(self, g: MatchingGame) -> None:
        """Check structural invariants and cached-payoff drift against ``g``."""
        seen = set()
        for i, j in self.mu.items():
            if j is None:
                continue
            if j in seen:
                raise ContractViolation("matching is not one-to-one on real agents")
            seen.add(j)
            if (i, j) not in self.assignments:
                raise ContractViolation(f"matched couple ({i},{j}) has no assignment")
        u, v = profile_payoffs(g, self)
        for a, b in zip(u, self.u):
            if abs(float(a) - float(b)) > CACHE_TOL:
                raise ContractViolation("cached man payoff drifted")
        for a, b in zip(v, self.v):
            if abs(float(a) - float(b)) > CACHE_TOL:
                raise ContractViolation("cached woman payoff drifted")


@dataclass(frozen=True)
class OutsideOptions:
    """Best payoffs reachable outside the couple (the empty player included)."""

    u_eps: Number
    v_eps: Number


# ---------------------------------------------------------------------------
# Payoff evaluation
# ---------------------------------------------------------------------------


def bilinear(x: MixedStrategy, M, y: MixedStrategy) -> float:
    return float(x.as_array() @ np.asarray(M, dtype=float) @ y.as_array())


def schedule_average(game: RepeatedGame, schedule) -> tuple:
    """Exact rational (A, B) average over one cycle of a pure schedule."""
    n = len(schedule)
    ua = sum((game.A[s][t] for s, t in schedule), Fraction(0))
    va = sum((game.B[s][t] for s, t in schedule), Fraction(0))
    return (ua / n, va / n)


def evaluate_payoffs(game: CoupleGame, a: StrategyAssignment):
    """Payoff pair (u, v) for one couple under an assignment.

    Raises ContractViolation when the assignment variant does not match the
    game variant.
    """
    if isinstance(game, ZeroSumGame):
        if not isinstance(a, MixedAssignment):
            raise ContractViolation("zero-sum couple needs a mixed assignment")
        u = bilinear(a.x, game.A, a.y)
        return u, -u
    if isinstance(game, CompetitiveGame):
        if not isinstance(a, MixedAssignment):
            raise ContractViolation("competitive couple needs a mixed assignment")
        return bilinear(a.x, game.A, a.y), bilinear(a.x, game.B, a.y)
    if isinstance(game, TransferGame):
        if not isinstance(a, TransferAssignment):
            raise ContractViolation("transfer couple needs a transfer assignment")
        return game.a - a.x + a.y, game.b + a.x - a.y
    if isinstance(game, RepeatedGame):
        if not isinstance(a, RepeatedAssignment):
            raise ContractViolation("repeated couple needs a repeated assignment")
        return schedule_average(game, a.sigma.schedule)
    raise ContractViolation(f"unknown couple game {type(game).__name__}")


def profile_payoffs(g: MatchingGame, pi: MatchingProfile) -> tuple:
    """Per-agent payoff vectors; unmatched or empty-matched agents get their IRP."""
    u = list(g.irp_men)
    v = list(g.irp_women)
    for i, j in pi.mu.items():
        if j is None:
            continue
        ui, vj = evaluate_payoffs(g.game(i, j), pi.assignments[(i, j)])
        u[i] = ui
        v[j] = vj
    return tuple(u), tuple(v)


def make_profile(g: MatchingGame, mu: dict, assignments: dict) -> MatchingProfile:
    """Build a profile with payoff caches computed from the assignments."""
    full_mu = {i: mu.get(i) for i in range(g.men)}
    pi = MatchingProfile(full_mu, dict(assignments), (), ())
    u, v = profile_payoffs(g, pi)
    pi.u = u
    pi.v = v
    return pi
