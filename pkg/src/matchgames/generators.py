"""Seeded instance generators for benchmarks and test suites.

All draws go through ``random.Random`` seeded with integers only, so a
(class, seed, shape) triple reproduces byte-identical instances on any
platform.  Entries are integers from a symmetric range (so V^max is exact);
IRP defaults per class keep the generated markets viable: constant-sum
couples need irp_man + irp_woman < 0 to clear both floors.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional, Tuple

from .core import (
    GAME_CLASSES,
    CompetitiveGame,
    ContractViolation,
    MatchingGame,
    RepeatedGame,
    TransferGame,
    ZeroSumGame,
)

GENERATOR_VERSION = 1

_CLASS_ID = {cls: k + 1 for k, cls in enumerate(GAME_CLASSES)}

_DEFAULT_IRP = {
    "zero_sum": (-12, -3),
    "strictly_competitive": (-12, -3),
    "repeated": (-5, 2),
    "transfer": (0, 5),
}

# affine scales for strictly competitive couples; dyadic so floats stay exact
_SCALES = (0.5, 1.0, 2.0)


def generate(game_class: str, men: int, women: int, actions: int = 3,
             entry_range: int = 10, seed: int = 0, epsilon=None,
             irp_range: Optional[Tuple[int, int]] = None) -> MatchingGame:
    """Deterministic random market of one game class."""
    if game_class not in GAME_CLASSES:
        raise ContractViolation(f"unknown game class {game_class!r}")
    rng = random.Random(1_000_003 * _CLASS_ID[game_class] + 17 * seed + 1_000_000_007 * men
                        + 998_244_353 * women + actions)
    irp_lo, irp_hi = irp_range or _DEFAULT_IRP[game_class]

    def matrix(m, n):
        return [[rng.randint(-entry_range, entry_range) for _ in range(n)] for _ in range(m)]

    couples = {}
    for i in range(men):
        for j in range(women):
            m = rng.randint(1, actions)
            n = rng.randint(1, actions)
            if game_class == "zero_sum":
                couples[(i, j)] = ZeroSumGame(matrix(m, n))
            elif game_class == "strictly_competitive":
                A = matrix(m, n)
                lam = rng.choice(_SCALES)
                mu = rng.randint(-entry_range // 2, entry_range // 2)
                B = [[-(lam * a + mu) for a in row] for row in A]
                couples[(i, j)] = CompetitiveGame(A, B)
            elif game_class == "repeated":
                couples[(i, j)] = RepeatedGame(matrix(m, n), matrix(m, n))
            else:
                couples[(i, j)] = TransferGame(
                    rng.randint(0, 2 * entry_range), rng.randint(0, 2 * entry_range)
                )
    irp_men = tuple(rng.randint(irp_lo, irp_hi) for _ in range(men))
    irp_women = tuple(rng.randint(irp_lo, irp_hi) for _ in range(women))

    if epsilon is None:
        epsilon = Fraction(1, 4) if game_class == "repeated" else 0.25
    if game_class == "repeated":
        irp_men = tuple(Fraction(x) for x in irp_men)
        irp_women = tuple(Fraction(x) for x in irp_women)
        epsilon = Fraction(epsilon)
    return MatchingGame(men, women, game_class, couples, irp_men, irp_women, epsilon)
