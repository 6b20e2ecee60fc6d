"""The even discrete torus and dense vertex-set machinery.

T(L, d) is the graph on {0, ..., L-1}^d (L even) where two vertices are
adjacent iff they differ by 1 (mod L) in exactly one coordinate.  Vertices
are indexed row-major over coordinates; the index <-> coordinate bijection
is part of the file format contract and must not change.

Vertex sets are represented densely, one bool per vertex, and all boundary
operators are computed with periodic rolls of the d-dimensional indicator
array, so wraparound needs no special casing.

An edge is identified canonically as ``(m, dir)`` where ``m`` is the
min-index endpoint and ``dir`` in {+-1, ..., +-d} points from ``m`` to the
other endpoint (+a means +1 in coordinate a-1, mod L).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import BudgetExceededError, InvalidParameterError

DEFAULT_VERTEX_BUDGET = 1 << 24


class Parity(Enum):
    EVEN = "even"
    ODD = "odd"

    @property
    def opposite(self):
        return Parity.ODD if self is Parity.EVEN else Parity.EVEN


class TorusGraph:
    """Immutable torus instance. Safe to share across threads."""

    def __init__(self, L: int, d: int):
        self.L = L
        self.d = d
        self.n = L**d
        self.shape = (L,) * d

    def __repr__(self):
        return f"TorusGraph(L={self.L}, d={self.d})"

    def __eq__(self, other):
        return isinstance(other, TorusGraph) and (self.L, self.d) == (other.L, other.d)

    def __hash__(self):
        return hash((self.L, self.d))

    # -- coordinates ---------------------------------------------------

    def coords(self, v: int) -> tuple:
        return tuple(int(c) for c in np.unravel_index(v, self.shape))

    def index(self, coords) -> int:
        return int(np.ravel_multi_index([c % self.L for c in coords], self.shape))

    @cached_property
    def even_mask(self) -> np.ndarray:
        """Indicator of the even class (coordinate sum even)."""
        grid = np.indices(self.shape).sum(axis=0) % 2 == 0
        out = grid.ravel()
        out.flags.writeable = False
        return out

    @cached_property
    def parity_sign(self) -> np.ndarray:
        """+1 on even vertices, -1 on odd ones (int64)."""
        out = np.where(self.even_mask, 1, -1).astype(np.int64)
        out.flags.writeable = False
        return out

    # -- neighbors -----------------------------------------------------

    @cached_property
    def _shift_index(self) -> dict:
        """For each direction s, the index array P with P[v] = index(v + e_s)."""
        base = np.arange(self.n).reshape(self.shape)
        out = {}
        for a in range(self.d):
            out[a + 1] = np.roll(base, -1, axis=a).ravel()
            out[-(a + 1)] = np.roll(base, 1, axis=a).ravel()
        for arr in out.values():
            arr.flags.writeable = False
        return out

    def shifted_index(self, s: int) -> np.ndarray:
        """Index array mapping v to v + e_s (coordinates mod L)."""
        self._check_direction(s)
        return self._shift_index[s]

    @cached_property
    def neighbor_table(self) -> np.ndarray:
        """(n, 2d) array of neighbor indices, directions ordered +1,-1,...,+d,-d."""
        cols = []
        for a in range(1, self.d + 1):
            cols.append(self._shift_index[a])
            cols.append(self._shift_index[-a])
        out = np.stack(cols, axis=1)
        out.flags.writeable = False
        return out

    def neighbors(self, v: int) -> np.ndarray:
        return self.neighbor_table[v]

    @cached_property
    def edge_endpoints(self) -> tuple:
        """(tails, heads) arrays covering each edge once, as (v, v + e_a)."""
        tails = np.concatenate([np.arange(self.n)] * self.d)
        heads = np.concatenate([self._shift_index[a + 1] for a in range(self.d)])
        tails.flags.writeable = False
        heads.flags.writeable = False
        return tails, heads

    def _check_direction(self, s: int):
        if not isinstance(s, (int, np.integer)) or s == 0 or abs(s) > self.d:
            raise InvalidParameterError(
                f"direction must be a signed integer in +-1..+-{self.d}, got {s!r}"
            )

    # -- mask primitives -------------------------------------------------

    def _nd(self, mask: np.ndarray) -> np.ndarray:
        return mask.reshape(self.shape)

    def dilate(self, mask: np.ndarray) -> np.ndarray:
        """Union of neighbor sets: v is set iff some neighbor of v is in mask."""
        nd = self._nd(mask)
        acc = np.zeros(self.shape, dtype=bool)
        for a in range(self.d):
            acc |= np.roll(nd, 1, axis=a)
            acc |= np.roll(nd, -1, axis=a)
        return acc.ravel()

    def erode_neighbors(self, mask: np.ndarray) -> np.ndarray:
        """v is set iff all 2d neighbors of v are in mask."""
        nd = self._nd(mask)
        acc = np.ones(self.shape, dtype=bool)
        for a in range(self.d):
            acc &= np.roll(nd, 1, axis=a)
            acc &= np.roll(nd, -1, axis=a)
        return acc.ravel()

    def neighbor_counts(self, mask: np.ndarray) -> np.ndarray:
        """Per-vertex count of neighbors inside mask (int16)."""
        nd = self._nd(mask).astype(np.int16)
        acc = np.zeros(self.shape, dtype=np.int16)
        for a in range(self.d):
            acc += np.roll(nd, 1, axis=a)
            acc += np.roll(nd, -1, axis=a)
        return acc.ravel()

    def shift_mask(self, mask: np.ndarray, s: int) -> np.ndarray:
        """Indicator of {x + e_s : x in mask}."""
        self._check_direction(s)
        a = abs(s) - 1
        return np.roll(self._nd(mask), 1 if s > 0 else -1, axis=a).ravel()


def make_torus(L: int, d: int, max_vertices: int = DEFAULT_VERTEX_BUDGET) -> TorusGraph:
    """Build T(L, d), rejecting invalid parameters and over-budget instances."""
    if not isinstance(L, (int, np.integer)) or not isinstance(d, (int, np.integer)):
        raise InvalidParameterError("L and d must be integers")
    if d < 1:
        raise InvalidParameterError(f"d must be >= 1, got {d}")
    if L < 4 or L % 2 != 0:
        raise InvalidParameterError(f"L must be even and >= 4, got {L}")
    if L**d > max_vertices:
        raise BudgetExceededError(
            f"L^d = {L**d} exceeds the vertex budget {max_vertices}"
        )
    return TorusGraph(int(L), int(d))


class VertexSet:
    """A dense, value-semantic subset of the vertices of one torus."""

    __slots__ = ("graph", "mask")

    def __init__(self, graph: TorusGraph, mask: np.ndarray):
        if mask.shape != (graph.n,) or mask.dtype != np.bool_:
            raise InvalidParameterError("mask must be a bool array of length n")
        self.graph = graph
        self.mask = mask
        self.mask.flags.writeable = False

    # -- constructors ----------------------------------------------------

    @classmethod
    def empty(cls, graph: TorusGraph) -> "VertexSet":
        return cls(graph, np.zeros(graph.n, dtype=bool))

    @classmethod
    def full(cls, graph: TorusGraph) -> "VertexSet":
        return cls(graph, np.ones(graph.n, dtype=bool))

    @classmethod
    def from_indices(cls, graph: TorusGraph, indices) -> "VertexSet":
        mask = np.zeros(graph.n, dtype=bool)
        idx = np.asarray(list(indices), dtype=np.int64)
        if idx.size:
            if idx.min() < 0 or idx.max() >= graph.n:
                raise InvalidParameterError("vertex index out of range")
            mask[idx] = True
        return cls(graph, mask)

    @classmethod
    def even_class(cls, graph: TorusGraph) -> "VertexSet":
        return cls(graph, graph.even_mask.copy())

    @classmethod
    def odd_class(cls, graph: TorusGraph) -> "VertexSet":
        return cls(graph, ~graph.even_mask)

    # -- set algebra -----------------------------------------------------

    def _wrap(self, mask: np.ndarray) -> "VertexSet":
        return VertexSet(self.graph, mask)

    def _check_same_graph(self, other: "VertexSet"):
        if self.graph != other.graph:
            raise InvalidParameterError("vertex sets live on different graphs")

    def __or__(self, other):
        self._check_same_graph(other)
        return self._wrap(self.mask | other.mask)

    def __and__(self, other):
        self._check_same_graph(other)
        return self._wrap(self.mask & other.mask)

    def __sub__(self, other):
        self._check_same_graph(other)
        return self._wrap(self.mask & ~other.mask)

    def __invert__(self):
        return self._wrap(~self.mask)

    def __eq__(self, other):
        return (
            isinstance(other, VertexSet)
            and self.graph == other.graph
            and np.array_equal(self.mask, other.mask)
        )

    def __hash__(self):
        return hash((self.graph, self.mask.tobytes()))

    def __len__(self):
        return int(self.mask.sum())

    def __contains__(self, v):
        return bool(self.mask[v])

    def __iter__(self):
        return iter(self.indices.tolist())

    def __repr__(self):
        n = len(self)
        shown = self.indices[:8].tolist()
        tail = ", ..." if n > 8 else ""
        return f"VertexSet({n} of {self.graph.n}: {shown}{tail})"

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def is_subset_of(self, other: "VertexSet") -> bool:
        self._check_same_graph(other)
        return not np.any(self.mask & ~other.mask)

    def is_empty(self) -> bool:
        return not self.mask.any()

    # -- parity ------------------------------------------------------------

    def parity_part(self, parity: Parity) -> "VertexSet":
        em = self.graph.even_mask
        return self._wrap(self.mask & (em if parity is Parity.EVEN else ~em))

    def even_part(self) -> "VertexSet":
        return self.parity_part(Parity.EVEN)

    def odd_part(self) -> "VertexSet":
        return self.parity_part(Parity.ODD)

    # -- boundary operators --------------------------------------------------

    def ext_boundary(self) -> "VertexSet":
        """Vertices outside the set adjacent to something inside it."""
        return self._wrap(self.graph.dilate(self.mask) & ~self.mask)

    def int_boundary(self) -> "VertexSet":
        """Vertices inside the set adjacent to something outside it."""
        return self._wrap(self.graph.dilate(~self.mask) & self.mask)

    def closure(self) -> "VertexSet":
        """The set together with its exterior boundary."""
        return self._wrap(self.graph.dilate(self.mask) | self.mask)

    def nabla_size(self) -> int:
        """Number of edges with exactly one end in the set."""
        g = self.graph
        nd = g._nd(self.mask)
        total = 0
        for a in range(g.d):
            total += int(np.count_nonzero(nd != np.roll(nd, -1, axis=a)))
        return total

    def nabla_edges(self) -> list:
        """Canonical sorted list of crossing edges as (min_endpoint, signed_dir)."""
        g = self.graph
        nd = g._nd(self.mask)
        edges = []
        for a in range(g.d):
            cross = (nd != np.roll(nd, -1, axis=a)).ravel()
            tails = np.flatnonzero(cross)
            heads = g._shift_index[a + 1][tails]
            for t, h in zip(tails.tolist(), heads.tolist()):
                edges.append((t, a + 1) if t < h else (h, -(a + 1)))
        edges.sort()
        return edges

    def shift(self, s: int) -> "VertexSet":
        """The translate {x + e_s : x in the set}."""
        return self._wrap(self.graph.shift_mask(self.mask, s))

    # -- components --------------------------------------------------------

    def components(self) -> list:
        """Connected components in row-major discovery order (BFS dilation)."""
        g = self.graph
        remaining = self.mask.copy()
        out = []
        while remaining.any():
            seed = int(np.argmax(remaining))
            comp = np.zeros(g.n, dtype=bool)
            comp[seed] = True
            while True:
                grown = (comp | g.dilate(comp)) & remaining
                if np.array_equal(grown, comp):
                    break
                comp = grown
            out.append(self._wrap(comp))
            remaining &= ~comp
        return out


@dataclass(frozen=True)
class BoundaryOps:
    nabla_size: int
    nabla_edges: tuple
    int_boundary: VertexSet
    ext_boundary: VertexSet
    closure: VertexSet


def boundary_ops(X: VertexSet) -> BoundaryOps:
    """All boundary operators of a vertex set in one report."""
    return BoundaryOps(
        nabla_size=X.nabla_size(),
        nabla_edges=tuple(X.nabla_edges()),
        int_boundary=X.int_boundary(),
        ext_boundary=X.ext_boundary(),
        closure=X.closure(),
    )


def star_boundary(T: VertexSet) -> VertexSet:
    """Vertices all of whose 2d neighbors lie in T.

    T must be contained in a single parity class, so the result is exactly
    the subset of the exterior boundary that is fully surrounded by T.
    """
    if not (T.even_part().is_empty() or T.odd_part().is_empty()):
        raise InvalidParameterError("star boundary requires T inside one parity class")
    g = T.graph
    return VertexSet(g, g.erode_neighbors(T.mask))


def shift(X: VertexSet, s: int) -> VertexSet:
    """Module-level convenience for VertexSet.shift."""
    return X.shift(s)
