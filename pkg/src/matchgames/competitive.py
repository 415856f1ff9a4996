"""Strictly competitive couples, reduced to the zero-sum machinery.

A couple (A, B) with A the man's and B the woman's payoff matrix is strictly
competitive when A and -B are positive affine variants of each other.  All
solves happen on a one-dimensional "kernel" level: the kernel matrix is
whichever of A and -B has the larger span, so the other side's payoff is an
affine image with scale alpha <= 1.  Thresholds are rewritten onto the kernel
(with the epsilon correction on the scaled side) and every question is
answered by the zerosum module.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import ContractViolation, MixedStrategy
from . import zerosum

TOL = 1e-9

A_FROM_B = "a_from_b"  # A = alpha * kernel + offset, kernel = -B
B_FROM_A = "b_from_a"  # -B = alpha * kernel + offset, kernel = A


@dataclass(frozen=True)
class AffineMap:
    """Affine relation between the aligned pair, normalized to alpha <= 1.

    direction a_from_b: A = alpha*C + offset*U with C the aligned partner
    matrix; direction b_from_a: C = alpha*A + offset*U.
    """

    alpha: float
    offset: float
    direction: str

    def __post_init__(self):
        if not (0 < self.alpha <= 1 + TOL):
            raise ContractViolation("alpha must lie in (0, 1]")


def detect_affine(A, B) -> Optional[AffineMap]:
    """Detect whether B is a positive affine variant of A (aligned matrices).

    Uses the span-ratio construction: the candidate map is verified entrywise
    at tolerance 1e-9 and None is returned on failure.  The direction with
    scale <= 1 is stored.  Constant pairs map with alpha = 1 and the offset
    difference; one-sided constants are not affine variants.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise ContractViolation("matrices must have equal shapes")
    a_span = float(A.max() - A.min())
    b_span = float(B.max() - B.min())
    if a_span <= TOL and b_span <= TOL:
        return AffineMap(1.0, float(A.min() - B.min()), A_FROM_B)
    if a_span <= TOL or b_span <= TOL:
        return None
    if a_span <= b_span:
        alpha = a_span / b_span
        offset = float(A.min()) - alpha * float(B.min())
        if np.max(np.abs(A - (alpha * B + offset))) > TOL:
            return None
        return AffineMap(alpha, offset, A_FROM_B)
    alpha = b_span / a_span
    offset = float(B.min()) - alpha * float(A.min())
    if np.max(np.abs(B - (alpha * A + offset))) > TOL:
        return None
    return AffineMap(alpha, offset, B_FROM_A)


@dataclass(frozen=True)
class Kernel:
    """Zero-sum view of a strictly competitive couple.

    The kernel level ell = x Z y determines both real payoffs:
    man = man_scale*ell + man_off (increasing), woman = -(woman_scale*ell +
    woman_off) (decreasing).  Exactly one scale differs from 1 and it is <= 1.
    """

    Z: np.ndarray
    man_scale: float
    man_off: float
    woman_scale: float
    woman_off: float
    map: AffineMap

    def man_payoff(self, level: float) -> float:
        return self.man_scale * level + self.man_off

    def woman_payoff(self, level: float) -> float:
        return -(self.woman_scale * level + self.woman_off)

    def level_range(self) -> Tuple[float, float]:
        return float(self.Z.min()), float(self.Z.max())


def kernel_of(A, B) -> Kernel:
    """Build the kernel for a couple with payoff matrices (A, B).

    Raises ContractViolation when (A, -B) are not affine variants, i.e. the
    couple is not strictly competitive; instances are refused at load time.
    """
    A = np.asarray(A, dtype=float)
    C = -np.asarray(B, dtype=float)
    m = detect_affine(A, C)
    if m is None:
        raise ContractViolation("couple is not strictly competitive")
    if m.direction == A_FROM_B:
        return Kernel(C, m.alpha, m.offset, 1.0, 0.0, m)
    return Kernel(A, 1.0, 0.0, m.alpha, m.offset, m)


def transform_thresholds(map_: AffineMap, irp_u: float, irp_v: float) -> Tuple[float, float]:
    """Kernel-level bounds equivalent to the real IRPs (no epsilon correction).

    The man's floor becomes a kernel lower bound, the woman's a kernel upper
    bound (her kernel payoff is the negated level).
    """
    if map_.direction == A_FROM_B:
        return (irp_u - map_.offset) / map_.alpha, -irp_v
    return irp_u, (-irp_v - map_.offset) / map_.alpha


def transform_outside_options(map_: AffineMap, u: float, v: float, eps: float) -> Tuple[float, float]:
    """Kernel-level outside options with the epsilon correction on the scaled side.

    The scaled player's eps-relaxed participation set must coincide with the
    kernel one, which costs an extra eps*(1-alpha)/alpha shift; the unit-scale
    player transfers exactly.
    """
    a = map_.alpha
    corr = eps * (1.0 - a) / a
    if map_.direction == A_FROM_B:
        return (u - map_.offset) / a - corr, -v
    return u, (-v - map_.offset) / a + corr


def proposal_value(A, B, v_floor: float, eps: float):
    """Man's best real payoff with the woman at or above v_floor + eps."""
    k = kernel_of(A, B)
    # woman_payoff(level) >= v_floor + eps caps the level
    cap = (-(v_floor + eps) - k.woman_off) / k.woman_scale
    ls = zerosum.solve_level(k.Z, cap)
    if ls is None:
        return None
    return k.man_payoff(ls.achieved), k.woman_payoff(ls.achieved), ls.x, ls.y


def bid_value(A, B, reservation: float):
    """Woman's best real payoff with the man at or above his reservation."""
    k = kernel_of(A, B)
    floor = (reservation - k.man_off) / k.man_scale
    mn, mx = k.level_range()
    if floor > mx + TOL:
        return None
    ls = zerosum.solve_level(k.Z, max(floor, mn))
    return k.woman_payoff(ls.achieved), k.man_payoff(ls.achieved), ls.x, ls.y


def settle(A, B, woman_level: float):
    """Winner's best real payoff with the woman held at woman_level (clamped
    into the couple's achievable range)."""
    k = kernel_of(A, B)
    cap = (-woman_level - k.woman_off) / k.woman_scale
    mn, mx = k.level_range()
    ls = zerosum.solve_level(k.Z, min(max(cap, mn), mx))
    return k.man_payoff(ls.achieved), k.woman_payoff(ls.achieved), ls.x, ls.y


def cne_competitive(A, B, u: float, v: float, eps: float):
    """Constrained Nash equilibrium of the original game via the kernel.

    ``u`` and ``v`` are real-unit outside options.  The three-step scheme:
    detect the affine map, rewrite the outside options onto the kernel, and
    run the zero-sum construction there; the result satisfies the eps-CNE
    conditions in the original game because the scaled side's gains shrink by
    alpha <= 1.  Returns (x, y, (real_u, real_v)).
    """
    k = kernel_of(A, B)
    u_k, v_k = transform_outside_options(k.map, u, v, eps)
    x, y, level = zerosum.cne(k.Z, u_k, v_k, eps)
    return x, y, (k.man_payoff(level), k.woman_payoff(level))
