"""Proper 3-colorings, zero-sets, imbalance, and phase classification.

A coloring maps vertices to {0, 1, 2} with no monochromatic edge.  The
zero-set I = colors^{-1}(0) is then an independent set.  The *imbalance*
|I on even class| - |I on odd class| classifies a coloring as balanced,
even-phase, or odd-phase relative to a locality parameter rho:

    balanced    |imbalance| <= rho * n / 2
    even phase   imbalance  >  rho * n / 2
    odd phase    imbalance  < -rho * n / 2

Ties at the threshold are balanced (weak inequality).  rho is carried as
an exact rational: a string or Fraction is taken at face value ("0.22"
means 11/50), a float is converted to its exact binary value, so the
threshold comparison is exact integer arithmetic, never a float compare.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from numbers import Rational

import numpy as np

from .errors import (
    BadValueError,
    ImproperColoringError,
    InvalidParameterError,
    LengthMismatchError,
)
from .torus import Parity, TorusGraph, VertexSet, make_torus


class Phase(Enum):
    BALANCED = "balanced"
    EVEN = "even"
    ODD = "odd"


def exact_rho(rho) -> Fraction:
    """Normalize a locality parameter to an exact Fraction in (0, 1)."""
    if isinstance(rho, float):
        frac = Fraction(rho)
    elif isinstance(rho, str):
        frac = Fraction(rho)
    elif isinstance(rho, Rational):
        frac = Fraction(rho)
    else:
        raise InvalidParameterError(f"cannot interpret rho={rho!r} as a rational")
    if not 0 < frac < 1:
        raise InvalidParameterError(f"rho must lie in (0, 1), got {frac}")
    return frac


class Coloring:
    """An immutable proper 3-coloring of a torus."""

    __slots__ = ("graph", "colors", "__dict__")

    def __init__(self, graph: TorusGraph, colors: np.ndarray):
        self.graph = graph
        self.colors = colors
        self.colors.flags.writeable = False

    def __eq__(self, other):
        return (
            isinstance(other, Coloring)
            and self.graph == other.graph
            and np.array_equal(self.colors, other.colors)
        )

    def __hash__(self):
        return hash((self.graph, self.colors.tobytes()))

    def __repr__(self):
        return f"Coloring({self.graph!r}, {self.colors.tolist()})"

    @cached_property
    def zero_set(self) -> VertexSet:
        return VertexSet(self.graph, self.colors == 0)

    @cached_property
    def imbalance(self) -> int:
        zeros = self.colors == 0
        even = self.graph.even_mask
        return int(np.count_nonzero(zeros & even) - np.count_nonzero(zeros & ~even))


def first_violating_edge(graph: TorusGraph, colors: np.ndarray):
    """Smallest canonical edge (min_endpoint, signed_dir) with equal endpoint
    colors, or None if the coloring is proper."""
    best = None
    nd = colors.reshape(graph.shape)
    for a in range(graph.d):
        bad = (nd == np.roll(nd, -1, axis=a)).ravel()
        tails = np.flatnonzero(bad)
        if tails.size == 0:
            continue
        heads = graph._shift_index[a + 1][tails]
        for t, h in zip(tails.tolist(), heads.tolist()):
            edge = (t, a + 1) if t < h else (h, -(a + 1))
            if best is None or edge < best:
                best = edge
    return best


def is_proper(graph: TorusGraph, colors: np.ndarray) -> bool:
    tails, heads = graph.edge_endpoints
    return bool(np.all(colors[tails] != colors[heads]))


def validate(graph: TorusGraph, colors) -> Coloring:
    """Check a raw array and wrap it as a Coloring, or raise with a witness."""
    arr = np.asarray(colors)
    if arr.shape != (graph.n,):
        raise LengthMismatchError(
            f"expected {graph.n} colors for {graph!r}, got shape {arr.shape}"
        )
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == arr.astype(np.int64)):
            raise BadValueError(int(np.argmax(arr != arr.astype(np.int64))), "non-integer")
        arr = arr.astype(np.int64)
    bad = (arr < 0) | (arr > 2)
    if bad.any():
        i = int(np.argmax(bad))
        raise BadValueError(i, int(arr[i]))
    arr = arr.astype(np.uint8)
    edge = first_violating_edge(graph, arr)
    if edge is not None:
        raise ImproperColoringError(edge)
    return Coloring(graph, arr)


def wrap_unchecked(graph: TorusGraph, colors: np.ndarray) -> Coloring:
    """Wrap an array known to be proper (used by the dynamics hot path)."""
    return Coloring(graph, colors)


def imbalance(chi: Coloring) -> int:
    """|zeros on even class| - |zeros on odd class|, exactly."""
    return chi.imbalance


@dataclass(frozen=True)
class PhaseClass:
    tag: Phase
    rho: Fraction
    imbalance: int


def phase_of_imbalance(imb: int, rho, n: int) -> Phase:
    """Phase tag from the imbalance alone; threshold compared exactly."""
    frac = exact_rho(rho)
    threshold = frac * n / 2
    if imb > threshold:
        return Phase.EVEN
    if -imb > threshold:
        return Phase.ODD
    return Phase.BALANCED


def phase_cutoff(rho, n: int) -> int:
    """Smallest integer k with k > rho*n/2; phases are |imbalance| >= k."""
    threshold = exact_rho(rho) * n / 2
    k = int(threshold)  # floor for nonnegative rationals
    return k + 1


def classify(chi: Coloring, rho) -> PhaseClass:
    frac = exact_rho(rho)
    imb = chi.imbalance
    return PhaseClass(phase_of_imbalance(imb, frac, chi.graph.n), frac, imb)


def ground_state(graph: TorusGraph, parity: Parity) -> Coloring:
    """Color 0 on the chosen parity class and 1 on the other.

    The canonical extreme-phase start state: imbalance is +n/2 for the even
    class and -n/2 for the odd class.
    """
    even = graph.even_mask
    zero_on = even if parity is Parity.EVEN else ~even
    colors = np.where(zero_on, 0, 1).astype(np.uint8)
    return Coloring(graph, colors)


# -- interchange file --------------------------------------------------------

def coloring_to_json(chi: Coloring) -> dict:
    return {"L": chi.graph.L, "d": chi.graph.d, "colors": chi.colors.tolist()}


def save_coloring(chi: Coloring, path):
    with open(path, "w") as fh:
        json.dump(coloring_to_json(chi), fh)
        fh.write("\n")


def coloring_from_json(obj: dict) -> Coloring:
    graph = make_torus(obj["L"], obj["d"])
    return validate(graph, obj["colors"])


def load_coloring(path) -> Coloring:
    with open(path) as fh:
        return coloring_from_json(json.load(fh))
