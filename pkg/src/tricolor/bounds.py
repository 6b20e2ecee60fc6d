"""Closed-form counting ingredients and the entropy condition.

Logs are base 2 throughout: the counts these formulas feed are powers of
two, and H(1/2) must equal 1.  Asymptotic statements are evaluated and
reported, never asserted at small d; the exact inequalities (the binomial
tail bound, the residual component bound, the per-pair free-choice bound)
are checked with exact integer arithmetic wherever a comparison is made.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .coloring import exact_rho
from .errors import InvalidParameterError
from .torus import VertexSet, star_boundary


def binary_entropy(x: float) -> float:
    """H(x) = -x log2 x - (1-x) log2(1-x), with H(0) = H(1) = 0."""
    if not 0 <= x <= 1:
        raise InvalidParameterError(f"entropy argument must be in [0, 1], got {x}")
    if x in (0.0, 1.0):
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


@dataclass(frozen=True)
class EntropyParams:
    rho: Fraction
    entropy: float
    condition_value: float  # H(rho) + rho
    satisfied: bool


def entropy_condition(rho) -> EntropyParams:
    """Evaluate H(rho) + rho and whether it is strictly below 1."""
    frac = exact_rho(rho)
    h = binary_entropy(float(frac))
    value = h + float(frac)
    return EntropyParams(rho=frac, entropy=h, condition_value=value, satisfied=value < 1)


def entropy_threshold(tol: float = 1e-9) -> float:
    """The unique root of H(x) + x = 1 in (0, 1/2), by bisection.

    H(x) + x is strictly increasing there, 0 at 0+ and 1.5 at 1/2.
    """
    lo, hi = 1e-12, 0.5
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if binary_entropy(mid) + mid < 1:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


@dataclass(frozen=True)
class ChernoffCheck:
    M: int
    beta: Fraction
    lhs: int          # sum of C(M, i) for i <= floor(beta M), exact
    rhs: float        # 2^(H(beta) M)
    holds: bool


def chernoff_bound_check(M: int, beta) -> ChernoffCheck:
    """The binomial tail bound: sum_{i <= beta M} C(M, i) <= 2^(H(beta) M)."""
    if M < 1:
        raise InvalidParameterError("M must be >= 1")
    frac = Fraction(beta)
    if not 0 < frac <= Fraction(1, 2):
        raise InvalidParameterError(f"beta must be in (0, 1/2], got {frac}")
    cut = int(frac * M)  # floor
    lhs = sum(math.comb(M, i) for i in range(cut + 1))
    rhs = 2.0 ** (binary_entropy(float(frac)) * M)
    return ChernoffCheck(M=M, beta=frac, lhs=lhs, rhs=rhs, holds=lhs <= rhs)


@dataclass(frozen=True)
class CompCount:
    comp: int
    bound: Fraction  # L^d / (2d)
    holds: bool
    residual: VertexSet


def comp_count(A: VertexSet, B: VertexSet) -> CompCount:
    """Components of the torus minus A, B and their fully-surrounded
    boundaries, with the exact bound comp <= L^d / 2d.

    A must be even-class, B odd-class, with no edges between them (the
    free-choice decomposition is only valid then); a violating edge is
    rejected.
    """
    graph = A.graph
    if not A.odd_part().is_empty():
        raise InvalidParameterError("A must lie in the even class")
    if not B.even_part().is_empty():
        raise InvalidParameterError("B must lie in the odd class")
    touching = A.ext_boundary() & B
    if not touching.is_empty():
        raise InvalidParameterError(
            f"A and B are adjacent (witness vertex {int(touching.indices[0])})"
        )
    removed = A | B | star_boundary(A) | star_boundary(B)
    residual = ~removed
    comp = len(residual.components())
    holds = comp * 2 * graph.d <= graph.n
    return CompCount(comp=comp, bound=Fraction(graph.n, 2 * graph.d), holds=holds, residual=residual)


@dataclass(frozen=True)
class FreeColorCheck:
    count: int     # colorings whose zero-set is exactly A | B
    cap: int       # 2^(|star A| + |star B| + comp(A, B))
    holds: bool


def free_color_bound(idx, A: VertexSet, B: VertexSet) -> FreeColorCheck:
    """Per-pair free-choice bound on an enumerated instance: the number of
    colorings with zero-set exactly A union B is at most
    2^(|star A| + |star B| + comp(A, B))."""
    cc = comp_count(A, B)
    zero_mask = (A | B).mask
    count = int(np.count_nonzero(np.all((idx.colorings == 0) == zero_mask, axis=1)))
    exponent = len(star_boundary(A)) + len(star_boundary(B)) + cc.comp
    cap = 2**exponent
    return FreeColorCheck(count=count, cap=cap, holds=count <= cap)


@dataclass(frozen=True)
class Census:
    count: int
    fraction: Fraction


def small_class_census(idx, rho=None) -> Census:
    """Count colorings with min(|even zeros|, |odd zeros|) <= L^d / (4 sqrt d).

    rho is accepted for interface uniformity but plays no role; the
    threshold is rho-free.
    """
    graph = idx.graph
    d, n = graph.d, graph.n
    even = graph.even_mask
    zeros = idx.colorings == 0
    ie = zeros[:, even].sum(axis=1).astype(np.int64)
    io = zeros[:, ~even].sum(axis=1).astype(np.int64)
    mins = np.minimum(ie, io)
    # min <= n / (4 sqrt d)  iff  16 min^2 d <= n^2, both sides integers
    member = 16 * mins * mins * d <= n * n
    count = int(np.count_nonzero(member))
    return Census(count=count, fraction=Fraction(count, len(idx)))
