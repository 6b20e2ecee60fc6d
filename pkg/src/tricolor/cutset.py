"""Cutset extraction from a coloring's zero-set and its structural checks.

For a coloring with zero-set I, take each connected component R of the
closure of I's even part (or odd part), and each component C of the
complement of R.  The edges between C and W = complement(C) form a
minimal edge cutset: both sides are connected and partition V.  A cutset
is *even* if it came from the even part of I, *odd* otherwise; its
*interior* is the smaller of C and W, with ties going to W.

For an even cutset, write the *core* for W's even part and the *shell*
for W's odd part (mirrored for odd cutsets).  The hard structural checks
are:

* the inner boundary of W lies in the shell class and carries no zeros,
* the outer boundary of W lies in the core class and carries no zeros,
* shell closure: the shell equals the exterior boundary of the core,
* core star: the core equals the set of core-class vertices all of whose
  neighbors lie in the shell,
* edge count: |cutset| = 2d * (|shell| - |core|).

The size inequality |cutset| >= max(|W|^(1-1/d), d^1.9) is evaluated and
reported as information only; it is an asymptotic (large d) statement.

A best-effort family Gamma(I) is selected greedily: keep a maximal
subfamily of even cutsets with pairwise-disjoint interiors, preferring
larger interiors, and require the even zeros to be covered by the chosen
interiors; if that fails, mirror on the odd side.  Failure is reported as
data (coverage_ok = False), never as an exception: wrap-around zero
patterns (for instance a ground state) admit no such family under this
construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._matching import max_bipartite_matching
from .coloring import Coloring
from .errors import InvalidParameterError
from .torus import Parity, VertexSet

DEFAULT_BUCKET_CONSTANT = 6 / math.pi**2


@dataclass(frozen=True)
class Check:
    ok: bool
    witness: object = None


@dataclass(frozen=True)
class CutsetChecks:
    inner_boundary_parity: Check
    outer_boundary_parity: Check
    inner_boundary_zero_free: Check
    outer_boundary_zero_free: Check
    shell_closure: Check
    core_star: Check
    edge_count_identity: Check
    size_inequality_info: tuple  # (holds, |gamma|, |W|^(1-1/d), d^1.9), informational

    @property
    def hard_ok(self) -> bool:
        return all(
            c.ok
            for c in (
                self.inner_boundary_parity,
                self.outer_boundary_parity,
                self.inner_boundary_zero_free,
                self.outer_boundary_zero_free,
                self.shell_closure,
                self.core_star,
                self.edge_count_identity,
            )
        )

    def failures(self) -> list:
        names = (
            "inner_boundary_parity",
            "outer_boundary_parity",
            "inner_boundary_zero_free",
            "outer_boundary_zero_free",
            "shell_closure",
            "core_star",
            "edge_count_identity",
        )
        return [n for n in names if not getattr(self, n).ok]


@dataclass(frozen=True)
class Cutset:
    parity: Parity
    gamma: tuple  # canonical edge list of nabla(C)
    C: VertexSet
    W: VertexSet
    interior: VertexSet
    w_e: int
    w_o: int
    size: int
    topologically_nontrivial: bool
    checks: CutsetChecks

    @property
    def properties_verified(self) -> bool:
        return self.checks.hard_ok

    @property
    def core(self) -> VertexSet:
        """W's part in the cutset's own parity class (holds the zeros)."""
        return self.W.parity_part(self.parity)

    @property
    def shell(self) -> VertexSet:
        return self.W.parity_part(self.parity.opposite)

    @property
    def delta(self) -> int:
        """|shell| - |core|; the edge identity says size = 2d * delta."""
        shell, core = (self.w_o, self.w_e) if self.parity is Parity.EVEN else (self.w_e, self.w_o)
        return shell - core

    def to_report(self) -> dict:
        return {
            "parity": self.parity.value,
            "size": self.size,
            "w_e": self.w_e,
            "w_o": self.w_o,
            "interior_size": len(self.interior),
            "properties_verified": self.properties_verified,
            "topologically_nontrivial": self.topologically_nontrivial,
            "failed_checks": self.checks.failures(),
            "size_inequality_info": {
                "holds": self.checks.size_inequality_info[0],
                "size": self.checks.size_inequality_info[1],
                "volume_term": self.checks.size_inequality_info[2],
                "dimension_term": self.checks.size_inequality_info[3],
            },
        }


@dataclass(frozen=True)
class Extraction:
    cutsets: tuple
    wraps_torus: bool


def verify_properties(cs: Cutset, I: VertexSet) -> CutsetChecks:
    """Run all structural checks of a cutset against the zero-set I."""
    graph = I.graph
    same = cs.W.graph.even_mask if cs.parity is Parity.EVEN else ~cs.W.graph.even_mask
    W, mask = cs.W, cs.W.mask
    inner = W.int_boundary()
    outer = W.ext_boundary()

    def subset_check(vs: VertexSet, allowed: np.ndarray) -> Check:
        bad = vs.mask & ~allowed
        if bad.any():
            return Check(False, int(np.argmax(bad)))
        return Check(True)

    inner_parity = subset_check(inner, ~same)
    outer_parity = subset_check(outer, same)
    inner_zero = subset_check(inner, ~I.mask)
    outer_zero = subset_check(outer, ~I.mask)

    core_mask = mask & same
    shell_mask = mask & ~same
    closure_expected = graph.dilate(core_mask) & ~core_mask
    diff = shell_mask ^ closure_expected
    shell_closure = Check(not diff.any(), int(np.argmax(diff)) if diff.any() else None)

    star_expected = graph.erode_neighbors(shell_mask) & same
    diff2 = core_mask ^ star_expected
    core_star = Check(not diff2.any(), int(np.argmax(diff2)) if diff2.any() else None)

    shell_n, core_n = int(shell_mask.sum()), int(core_mask.sum())
    expected_size = 2 * graph.d * (shell_n - core_n)
    identity = Check(cs.size == expected_size, (cs.size, expected_size))

    w_total = len(W)
    volume_term = w_total ** (1 - 1 / graph.d) if w_total else 0.0
    dim_term = graph.d**1.9
    info = (cs.size >= max(volume_term, dim_term), cs.size, volume_term, dim_term)

    return CutsetChecks(
        inner_boundary_parity=inner_parity,
        outer_boundary_parity=outer_parity,
        inner_boundary_zero_free=inner_zero,
        outer_boundary_zero_free=outer_zero,
        shell_closure=shell_closure,
        core_star=core_star,
        edge_count_identity=identity,
        size_inequality_info=info,
    )


def _build_cutset(chi: Coloring, parity: Parity, C: VertexSet) -> Cutset:
    graph = chi.graph
    W = ~C
    gamma = tuple(C.nabla_edges())
    w_e = len(W.even_part())
    w_o = len(W.odd_part())
    interior = W if len(W) <= len(C) else C
    skeleton = Cutset(
        parity=parity,
        gamma=gamma,
        C=C,
        W=W,
        interior=interior,
        w_e=w_e,
        w_o=w_o,
        size=len(gamma),
        topologically_nontrivial=len(gamma) >= graph.L ** (graph.d - 1),
        checks=None,
    )
    checks = verify_properties(skeleton, chi.zero_set)
    return Cutset(
        parity=skeleton.parity,
        gamma=skeleton.gamma,
        C=skeleton.C,
        W=skeleton.W,
        interior=skeleton.interior,
        w_e=skeleton.w_e,
        w_o=skeleton.w_o,
        size=skeleton.size,
        topologically_nontrivial=skeleton.topologically_nontrivial,
        checks=checks,
    )


def extract_all(chi: Coloring) -> Extraction:
    """Every cutset of the coloring, with verified-property flags attached.

    A component R whose complement is empty (the closure wraps the whole
    torus) produces no cutsets and sets the wraps_torus diagnostic.
    """
    I = chi.zero_set
    cutsets = []
    seen = set()
    wraps = False
    for parity in (Parity.EVEN, Parity.ODD):
        part = I.parity_part(parity)
        if part.is_empty():
            continue
        for R in part.closure().components():
            complement = ~R
            if complement.is_empty():
                wraps = True
                continue
            for C in complement.components():
                key = (parity, C.mask.tobytes())
                if key in seen:
                    continue
                seen.add(key)
                cutsets.append(_build_cutset(chi, parity, C))
    return Extraction(cutsets=tuple(cutsets), wraps_torus=wraps)


@dataclass(frozen=True)
class GammaSelection:
    cutsets: tuple
    parity: Parity
    coverage_ok: bool
    wraps_torus: bool

    @property
    def is_even_class(self) -> bool:
        return self.coverage_ok and self.parity is Parity.EVEN


def _greedy_disjoint(cands: list) -> list:
    """Maximal subfamily with pairwise-disjoint interiors, larger first."""
    order = sorted(cands, key=lambda cs: (-len(cs.interior), cs.interior.mask.tobytes()))
    chosen = []
    if not order:
        return chosen
    taken = np.zeros(order[0].W.graph.n, dtype=bool)
    for cs in order:
        if not (cs.interior.mask & taken).any():
            chosen.append(cs)
            taken |= cs.interior.mask
    return chosen


def select_gamma(chi: Coloring) -> GammaSelection:
    """Best-effort greedy selection of a disjoint-interior covering family.

    An attempt on one parity side succeeds when that side's zeros are
    covered by the chosen interiors; a side with no zeros at all counts
    only when the whole zero-set is empty (a ground state must report
    failure, not a vacuous odd-side success).
    """
    extraction = extract_all(chi)
    I = chi.zero_set
    attempts = {}
    for parity in (Parity.EVEN, Parity.ODD):
        cands = [cs for cs in extraction.cutsets if cs.parity is parity]
        chosen = _greedy_disjoint(cands)
        part = I.parity_part(parity)
        covered = np.zeros(chi.graph.n, dtype=bool)
        for cs in chosen:
            covered |= cs.interior.mask
        coverage = not (part.mask & ~covered).any()
        if part.is_empty() and not I.is_empty():
            coverage = False
        attempts[parity] = GammaSelection(
            cutsets=tuple(chosen),
            parity=parity,
            coverage_ok=coverage,
            wraps_torus=extraction.wraps_torus,
        )
    if attempts[Parity.EVEN].coverage_ok:
        return attempts[Parity.EVEN]
    if attempts[Parity.ODD].coverage_ok:
        return attempts[Parity.ODD]
    return attempts[Parity.EVEN]


@dataclass(frozen=True)
class BucketSelection:
    by_scale: dict  # i -> tuple of cutsets with 2^(i-1) <= size < 2^i
    selected_scale: int
    ell: int


def dyadic_buckets(
    cutsets, constant: float = DEFAULT_BUCKET_CONSTANT
) -> BucketSelection:
    """Bucket cutsets by dyadic size and pick the dominant scale.

    The selected scale is the smallest i whose bucket carries at least
    constant / i^2 of the total weight sum w(gamma) = size^(d/(d-1)), with
    constant = 6/pi^2; since sum 1/i^2 = pi^2/6 such an i always exists.
    """
    cutsets = list(cutsets)
    if not cutsets:
        raise InvalidParameterError("dyadic bucketing needs a nonempty family")
    d = cutsets[0].W.graph.d
    if d < 2:
        raise InvalidParameterError("dyadic scale selection needs d >= 2")
    exponent = d / (d - 1)
    by_scale = {}
    for cs in cutsets:
        i = cs.size.bit_length()  # 2^(i-1) <= size < 2^i for size >= 1
        by_scale.setdefault(i, []).append(cs)
    total = sum(cs.size**exponent for cs in cutsets)
    selected = None
    for i in sorted(by_scale):
        weight = sum(cs.size**exponent for cs in by_scale[i])
        if weight >= constant * total / i**2:
            selected = i
            break
    assert selected is not None
    return BucketSelection(
        by_scale={i: tuple(v) for i, v in by_scale.items()},
        selected_scale=selected,
        ell=len(by_scale[selected]),
    )


@dataclass(frozen=True)
class Profile:
    """A list of (cutset size, witness vertex) requirements."""

    entries: tuple  # ((size, vertex), ...)


def profile_membership(chi: Coloring, profile: Profile) -> bool:
    """Does the selected family contain a subfamily matching the profile?

    Entry (c, v) matches a cutset of size c whose core contains v; a
    subfamily is a set of distinct cutsets, so this is an exact bipartite
    matching between entries and cutsets.
    """
    selection = select_gamma(chi)
    if not (selection.coverage_ok and selection.parity is Parity.EVEN):
        raise InvalidParameterError(
            "profile membership requires an even-parity covering selection"
        )
    entries = list(profile.entries)
    cutsets = selection.cutsets
    adj = []
    for size, vertex in entries:
        adj.append(
            [k for k, cs in enumerate(cutsets) if cs.size == size and vertex in cs.core]
        )
    matched, _, _ = max_bipartite_matching(len(entries), len(cutsets), adj)
    return matched == len(entries)
