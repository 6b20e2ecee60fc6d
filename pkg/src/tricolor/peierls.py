"""Shift surgery on cutset interiors, the unit-outflow weighting, coarse
approximations, and the cover-based reconstruction certificates.

Everything is stated for an even cutset; odd cutsets mirror by swapping
the parity classes.  Write W for the cutset's complement side, core for
W's even part and shell for W's odd part.

The surgery picks a direction s and the slab W^s = {x on the inner
boundary of W whose (-s)-neighbor leaves W}, chooses S inside W^s, and
produces the recoloring that is 0 on S, untouched on (W^s minus S) and
off W, and elsewhere on W copies the (-s)-neighbor's color with colors 1
and 2 transposed.  The output is proper whenever the moat conditions hold
(inner and outer boundary of W in the right classes and zero-free); the
original coloring is recovered from (W, s) alone.

Each image gets weight (1/4)^|C on zeros| (3/4)^|C off zeros| (1/2)^|D|
where C = W^s intersect A_shell intersect shifted core uncertainty and
D is the rest of W^s; the weights over all 2^|W^s| images sum to exactly
1 in rational arithmetic.

An approximation A of a cutset is a coarse certificate: A_core contains
the core, A_shell is inside the shell, and near-full degree conditions
hold (threshold 2d - sqrt(d), compared exactly as integers).  The
uncertainty regions Q are where A leaves membership in W undecided; good
triples are vertex covers of the induced Q bipartite graph that resolve
the uncertainty, and the B(K', L') evaluator bounds a flow weight by a
power product tracked exactly, including the sqrt(3) parity.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from ._matching import koenig_min_vertex_cover
from .coloring import Coloring, first_violating_edge, is_proper, wrap_unchecked
from .cutset import Cutset
from .errors import (
    FlowMembershipError,
    ImproperColoringError,
    InvalidParameterError,
)
from .torus import Parity, TorusGraph, VertexSet

_TRANSPOSE_12 = np.array([0, 2, 1], dtype=np.uint8)


def _degree_ok(count: int, d: int) -> bool:
    """count >= 2d - sqrt(d), decided in exact integer arithmetic."""
    k = 2 * d - count
    return k <= 0 or k * k <= d


@dataclass(eq=False)
class Approximation:
    """Parity-labeled coarse certificate (A_E, A_O) with its uncertainty
    regions; which side plays core/shell depends on the cutset's parity."""

    a_even: VertexSet
    a_odd: VertexSet

    def core(self, parity: Parity) -> VertexSet:
        return self.a_even if parity is Parity.EVEN else self.a_odd

    def shell(self, parity: Parity) -> VertexSet:
        return self.a_odd if parity is Parity.EVEN else self.a_even

    def q_core(self, parity: Parity) -> VertexSet:
        """Core-side uncertainty: approximate core vertices that touch the
        undecided part of the shell class."""
        graph = self.a_even.graph
        core = self.core(parity)
        shell_class = VertexSet(
            graph,
            ~graph.even_mask if parity is Parity.EVEN else graph.even_mask.copy(),
        )
        undecided = shell_class - self.shell(parity)
        return core & undecided.ext_boundary()

    def q_shell(self, parity: Parity) -> VertexSet:
        graph = self.a_even.graph
        core = self.core(parity)
        shell_class = VertexSet(
            graph,
            ~graph.even_mask if parity is Parity.EVEN else graph.even_mask.copy(),
        )
        return (shell_class - self.shell(parity)) & core.ext_boundary()


def identity_approximation(cs: Cutset) -> Approximation:
    """The exact certificate (W_core, W_shell); its uncertainty is empty."""
    even_part = cs.W.even_part()
    odd_part = cs.W.odd_part()
    return Approximation(a_even=even_part, a_odd=odd_part)


def is_approximation(A: Approximation, cs: Cutset) -> bool:
    """Evaluate the four defining conditions exactly."""
    graph = cs.W.graph
    d = graph.d
    parity = cs.parity
    core_w = cs.core
    shell_w = cs.shell
    a_core = A.core(parity)
    a_shell = A.shell(parity)
    if not core_w.is_subset_of(a_core):
        return False
    if not a_shell.is_subset_of(shell_w):
        return False
    counts = graph.neighbor_counts(a_shell.mask)
    for v in a_core.indices.tolist():
        if not _degree_ok(int(counts[v]), d):
            return False
    core_class = graph.even_mask if parity is Parity.EVEN else ~graph.even_mask
    outside_core = core_class & ~a_core.mask
    counts2 = graph.neighbor_counts(outside_core)
    shell_class = ~core_class
    for v in np.flatnonzero(shell_class & ~a_shell.mask).tolist():
        if not _degree_ok(int(counts2[v]), d):
            return False
    return True


# -- shift surgery -------------------------------------------------------------

@dataclass(eq=False)
class ShiftContext:
    chi: Coloring
    cs: Cutset
    s: int
    approx: Approximation
    w_s: VertexSet
    c_set: VertexSet
    d_set: VertexSet

    @cached_property
    def _base_image(self) -> np.ndarray:
        """The S = empty image; other images differ only by zeros on S."""
        return _shift_colors(self.chi, self.cs.W, self.s)


def slab(cs: Cutset, s: int) -> VertexSet:
    """W^s: inner-boundary vertices of W whose (-s)-neighbor leaves W."""
    W = cs.W
    return W.int_boundary() - W.shift(s)


def _require_moat(cs: Cutset):
    checks = cs.checks
    needed = (
        checks.inner_boundary_parity,
        checks.outer_boundary_parity,
        checks.inner_boundary_zero_free,
        checks.outer_boundary_zero_free,
    )
    if not all(c.ok for c in needed):
        raise InvalidParameterError(
            "shift surgery needs the moat conditions (boundary parity and "
            "zero-freeness) to hold for the cutset"
        )


def make_shift_context(
    chi: Coloring, cs: Cutset, s: int, approx: Approximation | None = None
) -> ShiftContext:
    """Assemble the surgery context; direction conditions are the caller's
    business (see choose_direction), the moat conditions are enforced."""
    chi.graph._check_direction(s)
    _require_moat(cs)
    if approx is None:
        approx = identity_approximation(cs)
    w_s = slab(cs, s)
    q_core = approx.q_core(cs.parity)
    c_set = w_s & approx.shell(cs.parity) & q_core.shift(s)
    d_set = w_s - c_set
    return ShiftContext(
        chi=chi, cs=cs, s=s, approx=approx, w_s=w_s, c_set=c_set, d_set=d_set
    )


def _shift_colors(chi: Coloring, W: VertexSet, s: int) -> np.ndarray:
    graph = chi.graph
    out = chi.colors.copy()
    body = W.mask & ~slab_mask(W, s, graph)
    gathered = _TRANSPOSE_12[chi.colors[graph.shifted_index(-s)]]
    out[body] = gathered[body]
    return out


def slab_mask(W: VertexSet, s: int, graph: TorusGraph) -> np.ndarray:
    return W.int_boundary().mask & ~graph.shift_mask(W.mask, s)


def shift_coloring(ctx: ShiftContext, S: VertexSet) -> Coloring:
    """The surgered coloring with zero set S inside the slab.

    An improper output means a violated precondition and is surfaced with
    the violating edge, never returned.
    """
    if not S.is_subset_of(ctx.w_s):
        raise InvalidParameterError("S must be a subset of the slab W^s")
    out = ctx._base_image.copy()
    out[S.mask] = 0
    graph = ctx.chi.graph
    if not is_proper(graph, out):
        raise ImproperColoringError(
            first_violating_edge(graph, out),
            "shift surgery produced an improper coloring",
        )
    return wrap_unchecked(graph, out)


def iter_images(ctx: ShiftContext, cap: int | None = None, rng=None):
    """Yield (S, image) over subsets of the slab.

    All 2^|slab| subsets in bitmask order when that count is within cap;
    otherwise `cap` subsets sampled uniformly (with replacement) from rng.
    """
    idx = ctx.w_s.indices.tolist()
    k = len(idx)
    graph = ctx.chi.graph
    if cap is None and k > 24:
        raise InvalidParameterError(f"2^{k} subsets; pass a cap and an rng")
    if cap is None or 2**k <= cap:
        for bits in range(2**k):
            members = [idx[i] for i in range(k) if bits >> i & 1]
            S = VertexSet.from_indices(graph, members)
            yield S, shift_coloring(ctx, S)
    else:
        if rng is None:
            raise InvalidParameterError("sampling beyond the cap needs an rng")
        for _ in range(cap):
            picks = rng.random(k) < 0.5
            S = VertexSet.from_indices(graph, [v for v, p in zip(idx, picks) if p])
            yield S, shift_coloring(ctx, S)


def reconstruct(chi_prime: Coloring, W: VertexSet, s: int) -> Coloring:
    """Invert the surgery from (W, s) alone: keep colors off W, and on W
    take the s-neighbor's color with 1 and 2 transposed."""
    graph = chi_prime.graph
    graph._check_direction(s)
    out = chi_prime.colors.copy()
    gathered = _TRANSPOSE_12[chi_prime.colors[graph.shifted_index(s)]]
    out[W.mask] = gathered[W.mask]
    if not is_proper(graph, out):
        raise ImproperColoringError(
            first_violating_edge(graph, out),
            "reconstruction produced an improper coloring; (W, s) do not "
            "match the surgery that built this coloring",
        )
    return wrap_unchecked(graph, out)


# -- flow ----------------------------------------------------------------------

def flow_weight(ctx: ShiftContext, chi_prime: Coloring) -> Fraction:
    """Exact weight of one surgery image; membership is verified, and the
    weights over all images of one context sum to exactly 1."""
    s_mask = chi_prime.zero_set.mask & ctx.w_s.mask
    S = VertexSet(ctx.chi.graph, s_mask.copy())
    expected = ctx._base_image.copy()
    expected[s_mask] = 0
    if not np.array_equal(expected, chi_prime.colors):
        raise FlowMembershipError(
            "coloring is not an image of this context's surgery"
        )
    c_zero = int(np.count_nonzero(ctx.c_set.mask & s_mask))
    c_rest = len(ctx.c_set) - c_zero
    return (
        Fraction(1, 4) ** c_zero
        * Fraction(3, 4) ** c_rest
        * Fraction(1, 2) ** len(ctx.d_set)
    )


# -- direction selection ---------------------------------------------------------

@dataclass(frozen=True)
class DirectionChoice:
    s: int
    met_conditions: bool
    diagnostics: dict  # s -> (slab size, |sigma_s(Q_core) & Q_shell|)


def choose_direction(cs: Cutset, A: Approximation) -> DirectionChoice:
    """Smallest direction (order +1, -1, +2, -2, ...) with a large slab and
    a small shifted-uncertainty overlap; falls back to the largest slab
    when no direction meets both conditions.

    Condition one is |W^s| >= 0.8 * (|shell| - |core|), compared as
    5|W^s| >= 4*delta; condition two is |sigma_s(Q_core) & Q_shell| <=
    5|W^s|/sqrt(d), compared as d*overlap^2 <= 25|W^s|^2.
    """
    graph = cs.W.graph
    d = graph.d
    delta = cs.delta
    q_core = A.q_core(cs.parity)
    q_shell = A.q_shell(cs.parity)
    order = [s for a in range(1, d + 1) for s in (a, -a)]
    diagnostics = {}
    chosen = None
    for s in order:
        w_s = slab(cs, s)
        overlap = len(q_core.shift(s) & q_shell)
        diagnostics[s] = (len(w_s), overlap)
        big_slab = 5 * len(w_s) >= 4 * delta
        small_overlap = d * overlap * overlap <= 25 * len(w_s) ** 2
        if chosen is None and big_slab and small_overlap:
            chosen = s
    if chosen is not None:
        return DirectionChoice(chosen, True, diagnostics)
    fallback = max(order, key=lambda s: (diagnostics[s][0], -order.index(s)))
    return DirectionChoice(fallback, False, diagnostics)


# -- good triples ----------------------------------------------------------------

@dataclass(frozen=True)
class GoodnessReport:
    is_cover: bool
    inclusion_minimal: bool
    subsets_ok: bool
    boundary_identity: bool

    @property
    def good(self) -> bool:
        return (
            self.is_cover
            and self.inclusion_minimal
            and self.subsets_ok
            and self.boundary_identity
        )


@dataclass(frozen=True)
class HatTriple:
    k_hat: VertexSet
    l_hat: VertexSet
    m_hat: VertexSet
    u: VertexSet
    goodness: GoodnessReport


@dataclass(frozen=True)
class GoodTriple:
    K: VertexSet
    Lset: VertexSet
    M: VertexSet
    k_prime: VertexSet
    l_prime: VertexSet
    goodness: GoodnessReport
    minimum_cover_size: int
    search_truncated: bool


def _induced_q_edges(graph: TorusGraph, q_core: VertexSet, q_shell: VertexSet):
    edges = []
    shell_mask = q_shell.mask
    for v in q_core.indices.tolist():
        for u in graph.neighbor_table[v]:
            if shell_mask[u]:
                edges.append((v, int(u)))
    return edges


def _goodness(graph, q_core, q_shell, u_set, K, L, M) -> GoodnessReport:
    edges = _induced_q_edges(graph, q_core, q_shell)
    cover = K.mask | L.mask | M.mask
    is_cover = all(cover[a] or cover[b] for a, b in edges)
    minimal = is_cover
    if is_cover:
        for v in np.flatnonzero(cover).tolist():
            if all(cover[a] and a != v or cover[b] and b != v for a, b in edges):
                minimal = False
                break
    subsets_ok = (
        K.is_subset_of(q_shell)
        and L.is_subset_of(u_set)
        and M.is_subset_of(q_core - u_set)
    )
    expected_k = (u_set - L).ext_boundary() & q_shell
    return GoodnessReport(
        is_cover=is_cover,
        inclusion_minimal=minimal,
        subsets_ok=subsets_ok,
        boundary_identity=K == expected_k,
    )


def hat_triple(cs: Cutset, A: Approximation, chi_prime: Coloring, s: int) -> HatTriple:
    """The canonical certificate (W & Q_shell, U - W, (Q_core - U) - W) with
    its goodness conditions evaluated, not assumed."""
    graph = cs.W.graph
    q_core = A.q_core(cs.parity)
    q_shell = A.q_shell(cs.parity)
    u_set = q_core & chi_prime.zero_set.shift(-s)
    k_hat = cs.W & q_shell
    l_hat = u_set - cs.W
    m_hat = (q_core - u_set) - cs.W
    goodness = _goodness(graph, q_core, q_shell, u_set, k_hat, l_hat, m_hat)
    return HatTriple(k_hat=k_hat, l_hat=l_hat, m_hat=m_hat, u=u_set, goodness=goodness)


def _enumerate_minimal_covers(edges, cap):
    """All inclusion-minimal covers of an edge list, by branching on an
    uncovered edge; truncated at cap candidates."""
    found = set()
    truncated = False

    def rec(cover, banned):
        nonlocal truncated
        if len(found) >= cap:
            truncated = True
            return
        for a, b in edges:
            if a not in cover and b not in cover:
                if a not in banned:
                    rec(cover | {a}, banned)
                if b not in banned:
                    rec(cover | {b}, banned | {a})
                return
        found.add(frozenset(cover))

    rec(frozenset(), frozenset())
    minimal = []
    for cov in found:
        if not any(other < cov for other in found):
            minimal.append(cov)
    return minimal, truncated


def select_good_triple(
    cs: Cutset, A: Approximation, chi_prime: Coloring, s: int, cap: int = 512
) -> GoodTriple:
    """A good triple with |K| + |L| as small as possible.

    Candidates are the inclusion-minimal covers of the induced Q bipartite
    graph (enumerated up to cap) plus the hat triple; ties break on the
    sorted vertex lists of K then L.  The Koenig minimum-cover size is
    reported alongside, since minimal and minimum covers differ in general.
    """
    graph = cs.W.graph
    q_core = A.q_core(cs.parity)
    q_shell = A.q_shell(cs.parity)
    hat = hat_triple(cs, A, chi_prime, s)
    u_set = hat.u
    edges = _induced_q_edges(graph, q_core, q_shell)

    core_ids = q_core.indices.tolist()
    shell_ids = q_shell.indices.tolist()
    core_pos = {v: i for i, v in enumerate(core_ids)}
    shell_pos = {v: i for i, v in enumerate(shell_ids)}
    adj = [[] for _ in core_ids]
    for a, b in edges:
        adj[core_pos[a]].append(shell_pos[b])
    left_cover, right_cover = koenig_min_vertex_cover(
        len(core_ids), len(shell_ids), adj
    )
    min_size = len(left_cover) + len(right_cover)

    covers, truncated = _enumerate_minimal_covers(edges, cap)
    candidates = []
    for cov in covers:
        K = VertexSet.from_indices(graph, [v for v in cov if q_shell.mask[v]])
        in_core = [v for v in cov if q_core.mask[v]]
        L = VertexSet.from_indices(graph, [v for v in in_core if u_set.mask[v]])
        M = VertexSet.from_indices(graph, [v for v in in_core if not u_set.mask[v]])
        candidates.append((K, L, M))
    candidates.append((hat.k_hat, hat.l_hat, hat.m_hat))

    best = None
    best_key = None
    for K, L, M in candidates:
        report = _goodness(graph, q_core, q_shell, u_set, K, L, M)
        if not report.good:
            continue
        key = (len(K) + len(L), tuple(sorted(K)), tuple(sorted(L)))
        if best_key is None or key < best_key:
            best_key = key
            best = (K, L, M, report)
    if best is None:
        # no candidate satisfies all goodness conditions (possible at small
        # d, where the lemma's hypotheses fail); fall back to the hat triple
        best = (hat.k_hat, hat.l_hat, hat.m_hat, hat.goodness)
    K, L, M, report = best
    return GoodTriple(
        K=K,
        Lset=L,
        M=M,
        k_prime=K - hat.k_hat,
        l_prime=L - hat.l_hat,
        goodness=report,
        minimum_cover_size=min_size,
        search_truncated=truncated,
    )


# -- the B(K', L') evaluator -------------------------------------------------------

@dataclass(frozen=True)
class Sqrt3Multiple:
    """An exact number q * sqrt(3)^e with rational q >= 0 and e in {0, 1}."""

    coeff: Fraction
    root: bool = False

    def __post_init__(self):
        if self.coeff < 0:
            raise InvalidParameterError("Sqrt3Multiple is for nonnegative values")
        if self.coeff == 0 and self.root:
            object.__setattr__(self, "root", False)

    def __float__(self):
        return float(self.coeff) * (3**0.5 if self.root else 1.0)

    def __mul__(self, other):
        if isinstance(other, Sqrt3Multiple):
            coeff = self.coeff * other.coeff
            if self.root and other.root:
                return Sqrt3Multiple(coeff * 3, False)
            return Sqrt3Multiple(coeff, self.root or other.root)
        return Sqrt3Multiple(self.coeff * Fraction(other), self.root)

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, Sqrt3Multiple):
            other = Sqrt3Multiple(Fraction(other))
        if self.coeff == 0:
            return other
        if other.coeff == 0:
            return self
        if other.root == self.root:
            return Sqrt3Multiple(self.coeff + other.coeff, self.root)
        raise InvalidParameterError("cannot add a root term to a rational term exactly")

    __radd__ = __add__

    def _cmp(self, other) -> int:
        if not isinstance(other, Sqrt3Multiple):
            other = Sqrt3Multiple(Fraction(other))
        if self.root == other.root:
            a, b = self.coeff, other.coeff
        elif self.root:
            a, b = 3 * self.coeff**2, other.coeff**2
        else:
            a, b = self.coeff**2, 3 * other.coeff**2
        return (a > b) - (a < b)

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except (TypeError, ValueError):
            return NotImplemented

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __hash__(self):
        return hash((self.coeff, self.root))


def sqrt3_over_2_power(m: int) -> Sqrt3Multiple:
    """(sqrt(3)/2)^m exactly, for m >= 0."""
    if m < 0:
        raise InvalidParameterError("exponent must be nonnegative")
    return Sqrt3Multiple(Fraction(3 ** (m // 2), 2**m), bool(m % 2))


def b_weight(w_e: int, w_o: int, k0: int, l0: int, kp: int, lp: int) -> Sqrt3Multiple:
    """B(K', L') = (sqrt(3)/2)^(w_o - w_e) * 2^|K0| / (3^(|K0|+|L0|) 2^(|K'|-|L'|)).

    Evaluated exactly as a rational power product with the sqrt(3) factor
    tracked symbolically.
    """
    for name, v in (("k0", k0), ("l0", l0), ("kp", kp), ("lp", lp)):
        if v < 0:
            raise InvalidParameterError(f"{name} must be nonnegative")
    if w_o < w_e:
        raise InvalidParameterError("need w_o >= w_e")
    lead = sqrt3_over_2_power(w_o - w_e)
    tail = Fraction(2**k0 * 2**lp, 3 ** (k0 + l0) * 2**kp)
    return lead * tail


def b_weight_subset_sum(w_e: int, w_o: int, k0: int, l0: int) -> Sqrt3Multiple:
    """Sum of B(K', L') over all subsets K' of K0 and L' of L0, exactly."""
    total = Sqrt3Multiple(Fraction(0))
    for kp in range(k0 + 1):
        for lp in range(l0 + 1):
            count = _binom(k0, kp) * _binom(l0, lp)
            total = total + count * b_weight(w_e, w_o, k0, l0, kp, lp)
    return total


def _binom(n, k):
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out
