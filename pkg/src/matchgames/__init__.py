"""Solvers and verifiers for epsilon-stable allocations in two-sided
matching markets whose couples play strategic games (zero-sum, strictly
competitive, infinitely repeated, or linear-transfer)."""

from .core import (
    AgentId,
    CompetitiveGame,
    ContractViolation,
    MatchingGame,
    MatchingProfile,
    MixedStrategy,
    NoFeasibleAgreement,
    OutsideOptions,
    RepeatedGame,
    RepeatedStrategy,
    TransferGame,
    ZeroSumGame,
)
from .engine import EngineError, propose_dispose, solve, stabilize
from .verify import StabilityReport, brute_force_blocking, external_stability, internal_stability

__all__ = [
    "AgentId",
    "CompetitiveGame",
    "ContractViolation",
    "EngineError",
    "MatchingGame",
    "MatchingProfile",
    "MixedStrategy",
    "NoFeasibleAgreement",
    "OutsideOptions",
    "RepeatedGame",
    "RepeatedStrategy",
    "StabilityReport",
    "TransferGame",
    "ZeroSumGame",
    "brute_force_blocking",
    "external_stability",
    "internal_stability",
    "propose_dispose",
    "solve",
    "stabilize",
]

__version__ = "0.1.0"
