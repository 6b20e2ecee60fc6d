"""Exhaustive ground truth for tiny instances.

Enumerates all proper 3-colorings of a small torus (backtracking with
forward checking), cross-checks the count with an independent
transfer-matrix computation, builds exact transition kernels as integer
numerator matrices over a common denominator, and computes total-variation
mixing times and the conductance lower bound

    tau >= pi(A) / (8 pi(M))

for the phase/balanced cut, with the kernel-support hypothesis checked
exhaustively rather than assumed.

Exact rational arithmetic is used for measures and kernel entries; matrix
powers for the TV curve run in float64 (documented tolerance 1e-12).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .coloring import Coloring, Phase, exact_rho, phase_of_imbalance
from .errors import (
    BudgetExceededError,
    DegenerateCutError,
    MixingCapError,
    NotErgodicError,
)
from .glauber import ChainSpec, connected_blocks, proper_block_recolorings
from .torus import TorusGraph

DEFAULT_STATE_BUDGET = 200_000
ENUMERATION_VERTEX_LIMIT = 40


class StateIndex:
    """Bijection between the enumerated proper colorings and dense indices.

    Colorings are listed in lexicographic order of the color array, each
    exactly once.
    """

    def __init__(self, graph: TorusGraph, colorings: np.ndarray):
        self.graph = graph
        self.colorings = colorings
        self.colorings.flags.writeable = False
        self._lookup = {c.tobytes(): i for i, c in enumerate(colorings)}
        even = graph.even_mask
        zeros = colorings == 0
        self.imbalances = (
            zeros[:, even].sum(axis=1) - zeros[:, ~even].sum(axis=1)
        ).astype(np.int64)
        self.imbalances.flags.writeable = False

    def __len__(self):
        return len(self.colorings)

    def index_of(self, colors: np.ndarray) -> int:
        return self._lookup[np.asarray(colors, dtype=np.uint8).tobytes()]

    def coloring(self, i: int) -> Coloring:
        return Coloring(self.graph, self.colorings[i].copy())

    def phase_indices(self, rho) -> dict:
        """Dense index arrays per phase tag at the given rho."""
        frac = exact_rho(rho)
        out = {Phase.BALANCED: [], Phase.EVEN: [], Phase.ODD: []}
        for i, imb in enumerate(self.imbalances.tolist()):
            out[phase_of_imbalance(imb, frac, self.graph.n)].append(i)
        return {k: np.array(v, dtype=np.int64) for k, v in out.items()}


def enumerate_colorings(
    graph: TorusGraph, max_states: int = DEFAULT_STATE_BUDGET
) -> StateIndex:
    """All proper 3-colorings by backtracking in row-major vertex order.

    Raises BudgetExceededError (with nothing returned, never a truncated
    list) if the instance is too large.
    """
    n = graph.n
    if n > ENUMERATION_VERTEX_LIMIT:
        raise BudgetExceededError(
            f"enumeration limited to {ENUMERATION_VERTEX_LIMIT} vertices, got {n}"
        )
    nb = graph.neighbor_table
    earlier = [tuple(int(u) for u in nb[v] if u < v) for v in range(n)]
    out = []
    colors = np.zeros(n, dtype=np.uint8)

    def rec(v):
        if v == n:
            out.append(colors.copy())
            if len(out) > max_states:
                raise BudgetExceededError(
                    f"more than {max_states} proper colorings on {graph!r}"
                )
            return
        for c in (0, 1, 2):
            if all(colors[u] != c for u in earlier[v]):
                colors[v] = c
                rec(v + 1)
        colors[v] = 0

    rec(0)
    return StateIndex(graph, np.array(out, dtype=np.uint8))


def transfer_matrix_count(L: int, d: int, max_slice_cells: int = 12) -> int:
    """Count proper 3-colorings of T(L, d) along one axis, independently of
    the backtracking enumerator.

    States are proper colorings of one (d-1)-dimensional slice, found by
    exhaustive filtering of all 3^(L^(d-1)) assignments; transitions encode
    inter-slice properness; the count is trace(T^L) in exact integers.
    """
    if L < 4 or L % 2 or d < 1:
        raise BudgetExceededError(f"invalid torus for transfer count: L={L}, d={d}")
    m = L ** (d - 1)
    if m > max_slice_cells:
        raise BudgetExceededError(
            f"slice has {m} cells; transfer-matrix oracle capped at {max_slice_cells}"
        )
    if d == 1:
        slice_edges = []
    else:
        shape = (L,) * (d - 1)
        base = np.arange(m).reshape(shape)
        slice_edges = []
        for a in range(d - 1):
            rolled = np.roll(base, -1, axis=a).ravel()
            slice_edges.extend(zip(range(m), rolled.tolist()))
    states = [
        assign
        for assign in itertools.product((0, 1, 2), repeat=m)
        if all(assign[u] != assign[v] for u, v in slice_edges)
    ]
    k = len(states)
    T = [
        [1 if all(a[i] != b[i] for i in range(m)) else 0 for b in states]
        for a in states
    ]

    def matmul(A, B):
        return [
            [sum(A[i][t] * B[t][j] for t in range(k)) for j in range(k)]
            for i in range(k)
        ]

    power, square, e = None, T, L
    while e:
        if e & 1:
            power = square if power is None else matmul(power, square)
        e >>= 1
        if e:
            square = matmul(square, square)
    return sum(power[i][i] for i in range(k))


@dataclass(frozen=True)
class ClassMeasures:
    balanced: Fraction
    even: Fraction
    odd: Fraction
    rho: Fraction


def stationary_measure(idx: StateIndex, rho) -> ClassMeasures:
    """Exact uniform-measure probabilities of the three phase classes."""
    frac = exact_rho(rho)
    parts = idx.phase_indices(frac)
    m = len(idx)
    return ClassMeasures(
        balanced=Fraction(len(parts[Phase.BALANCED]), m),
        even=Fraction(len(parts[Phase.EVEN]), m),
        odd=Fraction(len(parts[Phase.ODD]), m),
        rho=frac,
    )


class ExactKernel:
    """Dense transition matrix with exact integer numerators over one
    common denominator."""

    def __init__(self, numer: np.ndarray, denom: int, kind: str):
        self.numer = numer
        self.numer.flags.writeable = False
        self.denom = denom
        self.kind = kind

    @property
    def m(self) -> int:
        return self.numer.shape[0]

    def entry(self, i: int, j: int) -> Fraction:
        return Fraction(int(self.numer[i, j]), self.denom)

    def row_sums_exact(self) -> bool:
        return bool(np.all(self.numer.sum(axis=1) == self.denom))

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.numer, self.numer.T))

    def float_matrix(self) -> np.ndarray:
        return self.numer.astype(np.float64) / float(self.denom)

    def support(self) -> np.ndarray:
        return self.numer != 0


def exact_kernel(idx: StateIndex, spec: ChainSpec) -> ExactKernel:
    """Entry-exact one-step kernel of the configured chain on the full
    enumerated state space; the diagonal absorbs all rejected mass."""
    spec.validate(idx.graph)
    if spec.kind == "metropolis":
        return _metropolis_kernel(idx)
    return _block_kernel(idx, spec)


def _metropolis_kernel(idx: StateIndex) -> ExactKernel:
    graph = idx.graph
    n = graph.n
    m = len(idx)
    nb = graph.neighbor_table
    numer = np.zeros((m, m), dtype=np.int64)
    for i in range(m):
        base = idx.colorings[i]
        for v in range(n):
            cur = base[v]
            for j in (0, 1, 2):
                if j == cur:
                    numer[i, i] += 1
                elif np.any(base[nb[v]] == j):
                    numer[i, i] += 1
                else:
                    cand = base.copy()
                    cand[v] = j
                    numer[i, idx.index_of(cand)] += 1
    return ExactKernel(numer, 3 * n, "metropolis")


def _block_kernel(idx: StateIndex, spec: ChainSpec) -> ExactKernel:
    graph = idx.graph
    m = len(idx)
    blocks = connected_blocks(graph, spec.block_size)
    rows = [dict() for _ in range(m)]
    nblocks = len(blocks)
    for i in range(m):
        base = idx.colorings[i]
        for block in blocks:
            options = proper_block_recolorings(graph, base, block)
            w = Fraction(1, nblocks * len(options))
            for opt in options:
                cand = base.copy()
                cand[list(block)] = opt
                j = idx.index_of(cand)
                rows[i][j] = rows[i].get(j, Fraction(0)) + w
    denom = 1
    for row in rows:
        for frac in row.values():
            denom = denom * frac.denominator // gcd(denom, frac.denominator)
    numer = np.zeros((m, m), dtype=np.int64)
    for i, row in enumerate(rows):
        for j, frac in row.items():
            numer[i, j] = int(frac * denom)
    return ExactKernel(numer, denom, "block")


# -- ergodicity --------------------------------------------------------------

def _check_ergodic(K: ExactKernel):
    support = csr_matrix(K.support())
    ncomp, _ = connected_components(support, directed=True, connection="strong")
    if ncomp != 1:
        raise NotErgodicError(f"kernel support is reducible ({ncomp} strong components)")
    period = _period(K.support())
    if period != 1:
        raise NotErgodicError(f"kernel support is periodic with period {period}")


def _period(support: np.ndarray) -> int:
    """Period of a strongly connected directed graph via BFS level gcd."""
    m = support.shape[0]
    level = np.full(m, -1, dtype=np.int64)
    level[0] = 0
    frontier = [0]
    order = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in np.flatnonzero(support[u]):
                if level[v] < 0:
                    level[v] = level[u] + 1
                    nxt.append(int(v))
                    order.append(int(v))
        frontier = nxt
    g = 0
    for u in order:
        for v in np.flatnonzero(support[u]):
            g = gcd(g, int(level[u] + 1 - level[v]))
            if g == 1:
                return 1
    return g


# -- mixing time -------------------------------------------------------------

@dataclass(frozen=True)
class MixingResult:
    tau: int
    curve: tuple  # sorted (t, max-TV) pairs actually computed


def _max_tv(P: np.ndarray) -> float:
    m = P.shape[0]
    return float(0.5 * np.abs(P - 1.0 / m).sum(axis=1).max())


def exact_mixing_time(K: ExactKernel, cap: int = 100_000) -> MixingResult:
    """Smallest t0 with worst-start TV distance <= 1/e for all t > t0.

    Worst-start TV distance is nonincreasing in t (applying the kernel is a
    TV contraction), so tau is the largest t with distance > 1/e, found by
    repeated squaring and a binary bit descent.  Raises MixingCapError with
    the partial curve if the cap is reached first.
    """
    _check_ergodic(K)
    target = 1.0 / math.e
    P = K.float_matrix()
    curve = {}
    powers = [P]  # powers[k] = P^(2^k)
    t = 1
    curve[1] = _max_tv(P)
    if curve[1] <= target:
        return MixingResult(0, tuple(sorted(curve.items())))
    while curve[t] > target:
        if t >= cap:
            raise MixingCapError(cap, tuple(sorted(curve.items())))
        nxt = powers[-1] @ powers[-1]
        powers.append(nxt)
        t *= 2
        curve[t] = _max_tv(nxt)
    # largest bad t lies in [t/2, t); descend remaining bits
    k = len(powers) - 2
    t_bad = t // 2
    P_bad = powers[-2]
    for j in range(k - 1, -1, -1):
        cand = P_bad @ powers[j]
        tc = t_bad + (1 << j)
        curve[tc] = _max_tv(cand)
        if curve[tc] > target:
            t_bad, P_bad = tc, cand
    return MixingResult(t_bad, tuple(sorted(curve.items())))


# -- conductance -------------------------------------------------------------

def conductance_lower_bound(pi_A: Fraction, pi_M: Fraction) -> Fraction:
    """The mixing-time lower bound pi(A) / (8 pi(M))."""
    return pi_A / (8 * pi_M)


@dataclass(frozen=True)
class ConductanceReport:
    rho: Fraction
    pi_A: Fraction
    pi_M: Fraction
    bound: object  # Fraction, or math.inf when the phase set is closed
    bound_symmetric: object
    hypothesis_ok: bool
    witness: tuple | None  # offending (i, j) transition if the check failed


def exact_conductance_bound(idx: StateIndex, K: ExactKernel, rho) -> ConductanceReport:
    """Instantiate the conductance bound for A = even-phase colorings and
    M = balanced colorings.

    The support hypothesis (one step from A never leaves A union M) and
    pi(A) <= 1/2 are verified directly on the kernel; a violating
    transition is reported as a witness instead of silently assuming the
    bound applies.
    """
    frac = exact_rho(rho)
    parts = idx.phase_indices(frac)
    A = parts[Phase.EVEN]
    M = parts[Phase.BALANCED]
    m = len(idx)
    pi_A = Fraction(len(A), m)
    pi_M = Fraction(len(M), m)

    hypothesis_ok = pi_A <= Fraction(1, 2)
    witness = None
    forbidden = np.ones(m, dtype=bool)
    forbidden[A] = False
    forbidden[M] = False
    sub = K.numer[np.ix_(A, np.flatnonzero(forbidden))]
    if sub.size and np.any(sub != 0):
        ai, fj = np.argwhere(sub != 0)[0]
        witness = (int(A[ai]), int(np.flatnonzero(forbidden)[fj]))
        hypothesis_ok = False

    if pi_M == 0:
        closed = not np.any(K.numer[np.ix_(A, np.flatnonzero(~np.isin(np.arange(m), A)))])
        if closed:
            return ConductanceReport(frac, pi_A, pi_M, math.inf, math.inf,
                                     hypothesis_ok, witness)
        raise DegenerateCutError(
            "balanced class is empty but the even phase is not closed"
        )
    return ConductanceReport(
        rho=frac,
        pi_A=pi_A,
        pi_M=pi_M,
        bound=conductance_lower_bound(pi_A, pi_M),
        bound_symmetric=(1 - pi_A) / (16 * pi_M),
        hypothesis_ok=hypothesis_ok,
        witness=witness,
    )


# -- hitting times -----------------------------------------------------------

def exact_hitting_time(K: ExactKernel, start: int, targets) -> float:
    """Expected steps to reach the target set from a start state (float64)."""
    m = K.m
    targets = np.asarray(sorted(set(int(t) for t in targets)), dtype=np.int64)
    if start in set(targets.tolist()):
        return 0.0
    keep = np.ones(m, dtype=bool)
    keep[targets] = False
    Q = K.float_matrix()[np.ix_(keep, keep)]
    h = np.linalg.solve(np.eye(Q.shape[0]) - Q, np.ones(Q.shape[0]))
    return float(h[np.flatnonzero(keep).tolist().index(start)])
