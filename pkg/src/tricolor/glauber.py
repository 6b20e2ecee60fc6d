"""Local Markov chains on proper 3-colorings and trajectory recording.

Two chains are provided:

* ``metropolis``: pick a vertex v and a color j uniformly, probability
  1/(3n) per (v, j) pair; recolor v with j if the result is proper,
  otherwise stay.  Every transition changes at most one vertex.

* ``block``: pick a uniformly random connected block of at most
  ``block_size`` vertices (pooled over all sizes 1..block_size), then a
  uniformly random proper recoloring of the block given its boundary,
  found by exhaustive local enumeration.  The proposal is symmetric (the
  boundary, hence the option count, is unchanged by the move), so the
  uniform distribution is stationary and the Metropolis acceptance is
  identically 1.  Every transition changes at most block_size <=
  floor(rho * n) vertices.

Reproducibility contract
------------------------
The generator is numpy PCG64.  Replica ``r`` of seed root ``s`` draws
from ``default_rng(SeedSequence(entropy=s, spawn_key=(r,)))``.  The
Metropolis chain consumes one integer in [0, 3n) per step, decoded as
(vertex, color) = (r // 3, r % 3); the block chain consumes one integer
in [0, #blocks) then one in [0, #options).  Identical (seed, replica,
steps, stride) give bit-identical trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _mcmc
from .coloring import (
    Coloring,
    Phase,
    exact_rho,
    phase_cutoff,
    phase_of_imbalance,
    wrap_unchecked,
)
from .errors import ConfigError
from .torus import TorusGraph

GENERATOR_NAME = "numpy-pcg64"
STREAM_RULE = "default_rng(SeedSequence(entropy=seed, spawn_key=(replica,)))"

PHASE_CODES = {Phase.BALANCED: 0, Phase.EVEN: 1, Phase.ODD: 2}
PHASE_BY_CODE = (Phase.BALANCED, Phase.EVEN, Phase.ODD)

_DRAW_CHUNK = 1 << 16


def make_rng(seed: int, replica: int = 0) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(replica,)))
    )


@dataclass(frozen=True)
class ChainSpec:
    """A Markov kernel description plus seed and step budget."""

    kind: str = "metropolis"  # "metropolis" or "block"
    rho: object = Fraction(11, 50)
    block_size: int | None = None
    seed: int = 0
    replica: int = 0
    steps: int = 0

    def rho_fraction(self) -> Fraction:
        return exact_rho(self.rho)

    def validate(self, graph: TorusGraph):
        if self.kind not in ("metropolis", "block"):
            raise ConfigError(f"unknown chain kind {self.kind!r}")
        if self.steps < 0:
            raise ConfigError("steps must be >= 0")
        frac = self.rho_fraction()
        locality = int(frac * graph.n)  # floor(rho * n)
        if self.kind == "metropolis":
            if locality < 1:
                raise ConfigError(
                    f"metropolis changes one vertex per step but floor(rho*n) = "
                    f"{locality}; need rho >= 1/{graph.n}"
                )
        else:
            if self.block_size is None or self.block_size < 1:
                raise ConfigError("block chain needs block_size >= 1")
            if self.block_size > locality:
                raise ConfigError(
                    f"block_size {self.block_size} exceeds floor(rho*n) = {locality}"
                )


# -- single steps ------------------------------------------------------------

def metropolis_step(chi: Coloring, rng: np.random.Generator) -> Coloring:
    """One proposal of the single-site chain; returns the (possibly
    unchanged) next state."""
    graph = chi.graph
    r = int(rng.integers(0, 3 * graph.n))
    v, j = r // 3, r % 3
    cur = int(chi.colors[v])
    if j == cur or np.any(chi.colors[graph.neighbor_table[v]] == j):
        return chi
    colors = chi.colors.copy()
    colors[v] = j
    return wrap_unchecked(graph, colors)


def connected_blocks(graph: TorusGraph, max_size: int) -> tuple:
    """All connected vertex sets of size 1..max_size, each exactly once.

    Enumeration follows the exclusive-neighborhood extension scheme: a set
    is grown only through vertices larger than its minimum and not already
    adjacent to it, which makes the generation tree a bijection onto the
    connected subsets.  Results are cached on the graph.
    """
    cache = getattr(graph, "_block_cache", None)
    if cache is None:
        cache = {}
        graph._block_cache = cache
    if max_size in cache:
        return cache[max_size]
    nb = graph.neighbor_table
    out = []

    def extend(sub, ext, closed, root):
        out.append(tuple(sorted(sub)))
        if len(sub) == max_size:
            return
        ext = sorted(ext)
        for i, w in enumerate(ext):
            new_closed = closed | set(int(u) for u in nb[w])
            new_ext = set(ext[i + 1:])
            for u in nb[w]:
                u = int(u)
                if u > root and u not in closed and u != w:
                    new_ext.add(u)
            extend(sub | {w}, new_ext, new_closed | {w}, root)

    for v in range(graph.n):
        closed = {v} | set(int(u) for u in nb[v])
        ext = {int(u) for u in nb[v] if u > v}
        extend({v}, ext, closed, v)
    blocks = tuple(sorted(out))
    cache[max_size] = blocks
    return blocks


def proper_block_recolorings(graph: TorusGraph, colors: np.ndarray, block) -> list:
    """All proper color assignments of a block given the colors outside it,
    in deterministic lexicographic order."""
    block = list(block)
    inside = {v: i for i, v in enumerate(block)}
    nb = graph.neighbor_table
    allowed = []
    internal = []
    for i, v in enumerate(block):
        forbid = set()
        for u in nb[v]:
            u = int(u)
            if u in inside:
                if inside[u] > i:
                    internal.append((i, inside[u]))
            else:
                forbid.add(int(colors[u]))
        allowed.append([c for c in (0, 1, 2) if c not in forbid])
    out = []
    assign = [0] * len(block)

    def rec(i):
        if i == len(block):
            out.append(tuple(assign))
            return
        for c in allowed[i]:
            if all(assign[a] != c for a, b in internal if b == i):
                assign[i] = c
                rec(i + 1)

    rec(0)
    return out


def rho_local_step(
    chi: Coloring, spec: ChainSpec, rng: np.random.Generator
) -> Coloring:
    """One step of the block chain; Hamming distance of the update is at
    most block_size by construction."""
    spec.validate(chi.graph)
    graph = chi.graph
    blocks = connected_blocks(graph, spec.block_size)
    block = blocks[int(rng.integers(0, len(blocks)))]
    options = proper_block_recolorings(graph, chi.colors, block)
    choice = options[int(rng.integers(0, len(options)))]
    if all(chi.colors[v] == c for v, c in zip(block, choice)):
        return chi
    colors = chi.colors.copy()
    colors[list(block)] = choice
    assert int(np.count_nonzero(colors != chi.colors)) <= spec.block_size
    return wrap_unchecked(graph, colors)


# -- trajectories -------------------------------------------------------------

@dataclass(frozen=True)
class Trajectory:
    sample_stride: int
    imbalances: np.ndarray  # int64, sample at index k is after step k*stride
    phases: np.ndarray      # int8 codes, see PHASE_CODES
    escape_step: int | None
    steps: int
    rho: Fraction
    start_phase: Phase

    def phase_tags(self) -> list:
        return [PHASE_BY_CODE[c] for c in self.phases.tolist()]

    def balanced_fraction(self) -> float:
        return float(np.count_nonzero(self.phases == 0)) / len(self.phases)


def run(
    chi0: Coloring,
    spec: ChainSpec,
    stride: int = 1,
    observers: tuple = (),
) -> Trajectory:
    """Run the configured chain from chi0, recording the imbalance every
    ``stride`` steps (step 0 included) and the first entry step into the
    phase opposite the starting phase.

    Deterministic given (chi0, spec.seed, spec.replica): identical seeds
    give bit-identical trajectories.  Crossing the balanced band does not
    count as escape; a balanced start defines no escape at all.
    """
    graph = chi0.graph
    spec.validate(graph)
    if stride < 1:
        raise ConfigError("stride must be >= 1")
    rho = spec.rho_fraction()
    n = graph.n
    cutoff = phase_cutoff(rho, n)
    imb0 = chi0.imbalance
    start_phase = phase_of_imbalance(imb0, rho, n)
    if start_phase is Phase.EVEN:
        esc_dir, esc_cut = -1, -cutoff
    elif start_phase is Phase.ODD:
        esc_dir, esc_cut = 1, cutoff
    else:
        esc_dir, esc_cut = 0, 0

    rng = make_rng(spec.seed, spec.replica)
    n_samples = spec.steps // stride + 1
    imb_out = np.zeros(n_samples, dtype=np.int64)
    imb_out[0] = imb0

    colors = chi0.colors.copy()
    if observers:
        for obs in observers:
            obs(0, colors.copy(), imb0)

    if spec.kind == "metropolis":
        imb, esc = _run_metropolis(
            graph, colors, rng, spec.steps, stride, imb0,
            esc_dir, esc_cut, imb_out, observers,
        )
    else:
        imb, esc = _run_block(
            graph, colors, rng, spec, stride, imb0,
            esc_dir, esc_cut, imb_out, observers,
        )

    phases = np.zeros(n_samples, dtype=np.int8)
    phases[imb_out >= cutoff] = PHASE_CODES[Phase.EVEN]
    phases[imb_out <= -cutoff] = PHASE_CODES[Phase.ODD]
    return Trajectory(
        sample_stride=stride,
        imbalances=imb_out,
        phases=phases,
        escape_step=None if esc < 0 else int(esc),
        steps=spec.steps,
        rho=rho,
        start_phase=start_phase,
    )


def _run_metropolis(
    graph, colors, rng, steps, stride, imb, esc_dir, esc_cut, imb_out, observers
):
    neigh = graph.neighbor_table
    sign = graph.parity_sign
    esc = np.int64(-1)
    done = 0
    three_n = 3 * graph.n
    while done < steps:
        if observers:
            chunk = min(stride - done % stride, steps - done)
        else:
            chunk = min(_DRAW_CHUNK, steps - done)
        draws = rng.integers(0, three_n, size=chunk, dtype=np.int64)
        imb, esc = _mcmc.metropolis_chunk(
            colors, neigh, sign, draws,
            np.int64(imb), esc, np.int64(esc_dir), np.int64(esc_cut),
            np.int64(done), np.int64(stride), imb_out,
        )
        done += chunk
        if observers and done % stride == 0:
            for obs in observers:
                obs(done, colors.copy(), int(imb))
    return int(imb), int(esc)


def _run_block(
    graph, colors, rng, spec, stride, imb, esc_dir, esc_cut, imb_out, observers
):
    blocks = connected_blocks(graph, spec.block_size)
    sign = graph.parity_sign
    esc = -1
    for step in range(1, spec.steps + 1):
        block = blocks[int(rng.integers(0, len(blocks)))]
        options = proper_block_recolorings(graph, colors, block)
        choice = options[int(rng.integers(0, len(options)))]
        idx = list(block)
        old = colors[idx]
        new = np.array(choice, dtype=np.uint8)
        if not np.array_equal(old, new):
            assert len(idx) <= spec.block_size
            delta = int(((new == 0).astype(np.int64) - (old == 0)) @ sign[idx])
            colors[idx] = new
            imb += delta
            if esc < 0 and esc_dir != 0:
                if (esc_dir > 0 and imb >= esc_cut) or (esc_dir < 0 and imb <= esc_cut):
                    esc = step
        if step % stride == 0:
            imb_out[step // stride] = imb
            if observers:
                for obs in observers:
                    obs(step, colors.copy(), int(imb))
    return int(imb), int(esc)
