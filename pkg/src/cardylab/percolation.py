"""Random colorings, crossing events and their estimators.

Cells are colored blue/yellow independently with probability 1/2 (critical
site percolation on the triangular lattice in its hexagon representation).
Monochrome connectivity is plain cell adjacency for both colors.  Forced
boundary arcs are modeled as virtual monochrome nodes adjacent to the cells
along the arc, so the cell count and the enumeration oracle stay clean.

Three event kinds are supported:

* ``ARC_TO_ARC`` - a monochrome cell path joins cells adjacent to the source
  arc with cells adjacent to the target arc.
* ``SEPARATING_PATH`` - such a path exists and deleting the clusters that
  realize it disconnects the witness vertex from every cell adjacent to the
  avoid arc.  Two vertex conventions make the discrete boundary values of
  the crossing observables exact: a witness on the closure of the avoid arc
  is never separated, and a witness at the junction vertex where source and
  target arcs meet is always separated (the degenerate corner crossing).
* ``CIRCUIT`` - a monochrome cycle winds around the designated hole of an
  annular cell set; realized through the exact duality with opposite-color
  inner-to-outer crossings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Tuple

import numpy as np

from . import kernels
from .domain import DiscreteDomain
from .hexlattice import LatticeEdge, cell_edges

YELLOW = 1
BLUE = 0
COLOR_NAMES = {YELLOW: "yellow", BLUE: "blue"}

ARC_TO_ARC = "ARC_TO_ARC"
SEPARATING_PATH = "SEPARATING_PATH"
CIRCUIT = "CIRCUIT"


class MalformedQueryError(ValueError):
    """MALFORMED_QUERY: witness/avoid fields inconsistent with the kind."""


class TooLargeError(ValueError):
    """TOO_LARGE: exact enumeration is capped at 25 cells."""


@dataclass(frozen=True)
class ProbEstimate:
    mean: float
    stderr: float
    samples: int
    hits: int

    @classmethod
    def from_hits(cls, hits: int, samples: int) -> "ProbEstimate":
        mean = hits / samples
        return cls(mean, math.sqrt(mean * (1.0 - mean) / samples), samples, hits)


@dataclass(frozen=True)
class CrossingQuery:
    kind: str
    color: int
    source_arc: frozenset
    target_arc: frozenset
    witness_point: Optional[tuple] = None
    avoid_arc: Optional[frozenset] = None

    def __post_init__(self):
        if self.kind not in (ARC_TO_ARC, SEPARATING_PATH, CIRCUIT):
            raise MalformedQueryError(f"unknown kind {self.kind!r}")
        if self.color not in (YELLOW, BLUE):
            raise MalformedQueryError(f"color must be YELLOW or BLUE, got {self.color!r}")
        if self.kind == SEPARATING_PATH:
            if self.witness_point is None or not self.avoid_arc:
                raise MalformedQueryError("SEPARATING_PATH needs witness_point and avoid_arc")
        else:
            if self.avoid_arc is not None or (
                self.kind == ARC_TO_ARC and self.witness_point is not None
            ):
                raise MalformedQueryError(f"{self.kind} takes no witness/avoid fields")
        if self.source_arc & self.target_arc:
            raise MalformedQueryError("source and target arcs must be disjoint edge sets")


def arc_query(dom: DiscreteDomain, source: str, target: str, color: int = YELLOW) -> CrossingQuery:
    """ARC_TO_ARC between two named arcs of the domain."""
    return CrossingQuery(
        ARC_TO_ARC,
        color,
        frozenset(dom.arc_edges(source)),
        frozenset(dom.arc_edges(target)),
    )


def separating_query(
    dom: DiscreteDomain,
    source: Iterable[str],
    target: Iterable[str],
    avoid: Iterable[str],
    witness: tuple,
    color: int = YELLOW,
) -> CrossingQuery:
    """SEPARATING_PATH with arcs given by names (each side may join arcs)."""
    def edges(names):
        out = set()
        for nm in names:
            out.update(dom.arc_edges(nm))
        return frozenset(out)

    return CrossingQuery(
        SEPARATING_PATH, color, edges(source), edges(target), tuple(witness), edges(avoid)
    )


def circuit_query(dom: DiscreteDomain, color: int = YELLOW, hole: int = 1) -> CrossingQuery:
    """CIRCUIT around the given hole cycle of an annular domain."""
    if hole >= len(dom.walks):
        raise MalformedQueryError(f"domain has no hole #{hole}")
    inner = frozenset(
        LatticeEdge(*sorted((u, v))) for u, v in zip(dom.walks[hole], dom.walks[hole][1:])
    )
    outer = frozenset(dom.boundary_edges())
    return CrossingQuery(CIRCUIT, color, inner, outer)


@dataclass
class Coloring:
    """One sampled configuration; colors[i] is the color of domain.cells[i]."""

    domain: DiscreteDomain
    colors: np.ndarray
    boundary_colors: dict = field(default_factory=dict)
    seed_path: tuple = (0, 0)

    def color_of(self, cell) -> int:
        return int(self.colors[self.domain.cell_id[cell]])


def sample_coloring(
    dom: DiscreteDomain, stream: int, index: int, boundary_colors: Optional[dict] = None
) -> Coloring:
    """Deterministic coloring keyed by (stream, index, cell)."""
    keys = np.arange(len(dom.cells), dtype=np.uint64)
    colors = kernels.coloring_bits(stream, index, keys)
    return Coloring(dom, colors, dict(boundary_colors or {}), (stream, index))


# ---------------------------------------------------------------------------
# node layout shared by the reference evaluator, the MC wrappers and the oracle


class _NodeLayout:
    """Cells plus one virtual node per forced boundary arc."""

    def __init__(self, dom: DiscreteDomain, boundary_colors: Optional[dict] = None):
        self.dom = dom
        ncells = len(dom.cells)
        forced = sorted((boundary_colors or {}).items())
        self.nvirtual = len(forced)
        n = ncells + self.nvirtual
        self.fixed = np.full(n, -1, dtype=np.int8)
        self.keys = np.arange(n, dtype=np.uint64)
        self.virtual_edges = {}
        adj = [set() for _ in range(n)]
        indptr, indices = dom.adjacency_csr()
        for i in range(ncells):
            adj[i].update(int(j) for j in indices[indptr[i] : indptr[i + 1]])
        for k, (arc, color) in enumerate(forced):
            vid = ncells + k
            self.fixed[vid] = color
            es = frozenset(dom.arc_edges(arc))
            self.virtual_edges[vid] = es
            for cid in np.nonzero(dom.cells_adjacent_to_edges(es))[0]:
                adj[vid].add(int(cid))
                adj[int(cid)].add(vid)
        self.indptr = np.zeros(n + 1, dtype=np.int32)
        flat = []
        for i in range(n):
            row = sorted(adj[i])
            flat.extend(row)
            self.indptr[i + 1] = self.indptr[i] + len(row)
        self.indices = np.array(flat, dtype=np.int32)

    def edge_mask(self, edges: frozenset) -> np.ndarray:
        """Nodes carrying at least one of the given boundary/arc edges."""
        n = self.fixed.shape[0]
        mask = np.zeros(n, dtype=bool)
        mask[: len(self.dom.cells)] = self.dom.cells_adjacent_to_edges(edges)
        for vid, es in self.virtual_edges.items():
            if es & edges:
                mask[vid] = True
        return mask

    def node_colors(self, col: Coloring) -> np.ndarray:
        colors = np.empty(self.fixed.shape[0], dtype=np.uint8)
        colors[: len(self.dom.cells)] = col.colors
        for v in range(len(self.dom.cells), self.fixed.shape[0]):
            colors[v] = self.fixed[v]
        return colors


def _witness_flag(dom: DiscreteDomain, q: CrossingQuery) -> int:
    """+1 junction corner (always separated), -1 on the avoid closure, else 0."""
    w = q.witness_point
    avoid_closure = set()
    for e in q.avoid_arc:
        avoid_closure.update((e.a, e.b))
    if w in avoid_closure:
        return -1
    src_closure = set()
    for e in q.source_arc:
        src_closure.update((e.a, e.b))
    tgt_closure = set()
    for e in q.target_arc:
        tgt_closure.update((e.a, e.b))
    if w in (src_closure & tgt_closure):
        return 1
    return 0


def _witness_incidence(dom: DiscreteDomain, w: tuple) -> np.ndarray:
    inc = np.full(3, -1, dtype=np.int32)
    cells = dom.vertex_in_cells(w)
    if not cells:
        raise MalformedQueryError(f"witness vertex {w} has no in-domain cells")
    for k, c in enumerate(cells):
        inc[k] = dom.cell_id[c]
    return inc


# ---------------------------------------------------------------------------
# reference evaluator (pure python, used on single colorings and in tests)


def has_crossing(col: Coloring, q: CrossingQuery) -> bool:
    """Evaluate the query on one coloring."""
    layout = _NodeLayout(col.domain, col.boundary_colors)
    colors = layout.node_colors(col)
    if q.kind == ARC_TO_ARC:
        return _py_crossing(layout, colors, q.color, q.source_arc, q.target_arc)
    if q.kind == CIRCUIT:
        return not _py_crossing(layout, colors, 1 - q.color, q.source_arc, q.target_arc)
    flag = _witness_flag(col.domain, q)
    if flag:
        return flag > 0
    blocked = _py_blocked(layout, colors, q.color, q.source_arc, q.target_arc)
    reach = _py_reach(layout, blocked, layout.edge_mask(q.avoid_arc))
    for cid in _witness_incidence(col.domain, q.witness_point):
        if cid >= 0 and cid not in blocked and cid in reach:
            return False
    return True


def _py_crossing(layout, colors, want, source, target) -> bool:
    src = layout.edge_mask(frozenset(source))
    tgt = layout.edge_mask(frozenset(target))
    seen = set()
    stack = [int(v) for v in np.nonzero(src)[0] if colors[v] == want]
    seen.update(stack)
    while stack:
        v = stack.pop()
        if tgt[v]:
            return True
        for k in range(layout.indptr[v], layout.indptr[v + 1]):
            u = int(layout.indices[k])
            if u not in seen and colors[u] == want:
                seen.add(u)
                stack.append(u)
    return False


def _py_blocked(layout, colors, want, source, target) -> set:
    src = layout.edge_mask(frozenset(source))
    tgt = layout.edge_mask(frozenset(target))
    blocked: set = set()
    seen: set = set()
    for v0 in np.nonzero(src)[0]:
        v0 = int(v0)
        if colors[v0] != want or v0 in seen:
            continue
        comp = {v0}
        stack = [v0]
        seen.add(v0)
        touches = bool(tgt[v0])
        while stack:
            v = stack.pop()
            for k in range(layout.indptr[v], layout.indptr[v + 1]):
                u = int(layout.indices[k])
                if u not in seen and colors[u] == want:
                    seen.add(u)
                    comp.add(u)
                    stack.append(u)
                    if tgt[u]:
                        touches = True
        if touches:
            blocked |= comp
    return blocked


def _py_reach(layout, blocked: set, seeds_mask) -> set:
    reach = set()
    stack = [int(v) for v in np.nonzero(seeds_mask)[0] if int(v) not in blocked]
    reach.update(stack)
    while stack:
        v = stack.pop()
        for k in range(layout.indptr[v], layout.indptr[v + 1]):
            u = int(layout.indices[k])
            if u not in reach and u not in blocked:
                reach.add(u)
                stack.append(u)
    return reach


# ---------------------------------------------------------------------------
# Monte Carlo estimator and the enumeration oracle


def estimate(
    dom: DiscreteDomain,
    q: CrossingQuery,
    samples: int,
    stream: int,
    boundary_colors: Optional[dict] = None,
    index0: int = 0,
    nchunks: int = kernels.DEFAULT_CHUNKS,
) -> ProbEstimate:
    """Monte Carlo estimate; identical output for any worker count."""
    if samples < 1:
        raise ValueError("samples >= 1 required")
    layout = _NodeLayout(dom, boundary_colors)
    stream = int(stream) & (2**64 - 1)
    if q.kind == ARC_TO_ARC or q.kind == CIRCUIT:
        want = q.color if q.kind == ARC_TO_ARC else 1 - q.color
        per_chunk = kernels.crossing_hits(
            layout.indptr,
            layout.indices,
            layout.fixed,
            layout.keys,
            layout.edge_mask(q.source_arc),
            layout.edge_mask(q.target_arc),
            np.uint8(want),
            np.uint64(stream),
            np.uint64(index0),
            samples,
            min(nchunks, samples),
        )
        hits = int(kernels.sum_chunks(per_chunk))
        if q.kind == CIRCUIT:
            hits = samples - hits
        return ProbEstimate.from_hits(hits, samples)
    flag = _witness_flag(dom, q)
    per_chunk = kernels.separating_hits(
        layout.indptr,
        layout.indices,
        layout.fixed,
        layout.keys,
        np.uint8(q.color),
        layout.edge_mask(q.source_arc)[None, :],
        layout.edge_mask(q.target_arc)[None, :],
        layout.edge_mask(q.avoid_arc)[None, :],
        _witness_incidence(dom, q.witness_point)[None, :],
        np.array([[flag]], dtype=np.int8),
        np.uint64(stream),
        np.uint64(index0),
        samples,
        min(nchunks, samples),
    )
    hits = int(kernels.sum_chunks(per_chunk)[0, 0])
    return ProbEstimate.from_hits(hits, samples)


def brute_force(
    dom: DiscreteDomain, q: CrossingQuery, boundary_colors: Optional[dict] = None
) -> Fraction:
    """Exact probability by full enumeration over all 2^|cells| colorings."""
    m = len(dom.cells)
    if m > 25:
        raise TooLargeError(f"{m} cells exceed the enumeration cap of 25")
    layout = _NodeLayout(dom, boundary_colors)
    rand_ids = np.arange(m, dtype=np.int32)
    if q.kind in (ARC_TO_ARC, CIRCUIT):
        want = q.color if q.kind == ARC_TO_ARC else 1 - q.color
        hits = int(
            kernels.bf_crossing_hits(
                layout.indptr,
                layout.indices,
                layout.fixed,
                rand_ids,
                layout.edge_mask(q.source_arc),
                layout.edge_mask(q.target_arc),
                np.uint8(want),
            )
        )
        if q.kind == CIRCUIT:
            hits = 2**m - hits
        return Fraction(hits, 2**m)
    hits = int(
        kernels.bf_separating_hits(
            layout.indptr,
            layout.indices,
            layout.fixed,
            rand_ids,
            layout.edge_mask(q.source_arc),
            layout.edge_mask(q.target_arc),
            layout.edge_mask(q.avoid_arc),
            _witness_incidence(dom, q.witness_point),
            np.int8(_witness_flag(dom, q)),
            np.uint8(q.color),
        )
    )
    return Fraction(hits, 2**m)
