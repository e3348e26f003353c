"""Multi-scale Harris systems: nested separating segments around a boundary
point, built by percolation crossing decisions.

One ring at a time, the construction slides the current segment toward the
station, extracts the part of the slide visible from the station (the yellow
segment), and accepts the first position whose ring-crossing probability
falls in the window (theta+delta, 1-theta-delta); a discontinuous jump
across the window (tunnel mouths) triggers backsliding behind a half-way
barrier.  Oversized segments are trimmed to an effective region with a
controlled aspect ratio, and the accepted fragment is re-walled along a box
grid so that a corridor of whole boxes joins consecutive segments.

Every probability decision is Monte Carlo with a per-decision budget and a
margin delta, so estimator noise cannot push accepted rings outside
(theta, 1-theta); all decisions are recorded in the system's trace.
Lattice boxes are integer-coordinate approximations of squares, within one
cell of the exact shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .domain import DiscreteDomain, _boundary_walks, boundary_hop_distance
from .hexlattice import (
    SQRT3,
    HexCell,
    LatticeEdge,
    SegmentPath,
    cell_center,
    cell_edges,
    cell_xy,
    diameter_cells,
    make_edge,
    neighbors,
    vertex_xy,
)
from .percolation import YELLOW, BLUE, ProbEstimate

R_SIU = 0.5  # probability of one more yellow hexagon (single-hexagon SIU)


class SeparationViolatedError(ValueError):
    """SEPARATION_VIOLATED: the segment does not separate q from q'."""


class TooCloseError(ValueError):
    """TOO_CLOSE: target point closer to the segment than the slide length."""


class NotSeparatingError(ValueError):
    """NOT_SEPARATING: no single connected yellow segment separates."""


class WindowUnreachableError(RuntimeError):
    """WINDOW_UNREACHABLE: sliding and backsliding exhausted all positions."""

    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace or []


class ScaleExhaustedError(WindowUnreachableError):
    """The gap to the station is below one ring at this lattice spacing."""


class GeometryDegenerateError(RuntimeError):
    """GEOMETRY_DEGENERATE: box ordering claim failed in the Q-construction."""


class NoBoxPathError(RuntimeError):
    """NO_BOX_PATH: no corridor of full boxes joins the ring's segments."""

    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


@dataclass
class HarrisConfig:
    theta: float = 0.05
    delta: Optional[float] = None  # decision margin, defaults to theta/4
    B: int = 7  # aspect-ratio constant (calibrated; see calibrate.py)
    r: int = 3  # box-refinement exponent: the paper's circuit criterion is
    # unbounded at lab scales (lambda ~ 1e-4), so r is frozen at the
    # operative constraint 2^r >= B
    samples_per_decision: int = 4000
    gamma: float = 3.0  # ring cap multiplier: max_rings = ceil(gamma * log n)
    max_rings: Optional[int] = None
    eta: float = 0.5  # auxiliary-point depth fraction (rings from the disk)
    kappa_slack: int = 4  # additive cells allowed on effective-region bounds
    # station-crossing stop level.  At n <= 64 the crossing probability to a
    # single boundary cell never drops below ~0.3 (slow boundary one-arm
    # decay), so stopping at theta itself would empty every system; the
    # operative stop is geometric (no further window split fits) with this
    # level as a safety valve.
    stop_theta: float = 0.6

    def __post_init__(self):
        if not 0 < self.theta < R_SIU / (1.0 + R_SIU):
            raise ValueError(f"theta must lie in (0, {R_SIU/(1+R_SIU):.4f})")
        if self.delta is None:
            self.delta = self.theta / 4.0
        if 2**self.r < self.B:
            raise ValueError("need 2^r >= B")

    @property
    def window(self) -> tuple:
        return (self.theta + self.delta, 1.0 - self.theta - self.delta)

    def ring_cap(self, n: int) -> int:
        if self.max_rings is not None:
            return self.max_rings
        return max(3, math.ceil(self.gamma * math.log(n)))

    @property
    def theta_pp(self) -> float:
        return self.theta - self.theta**2


@dataclass
class Disk:
    center_cell: HexCell
    xy: tuple
    delta: float  # radius of the central disk (half the inradius)

    def cells(self, dom: DiscreteDomain) -> list:
        out = []
        for c in dom.cells:
            x, y = cell_xy(c, dom.eps)
            if math.hypot(x - self.xy[0], y - self.xy[1]) <= self.delta:
                out.append(c)
        return out or [self.center_cell]


def central_disk(dom: DiscreteDomain) -> tuple:
    """(Disk, delta): largest inscribed disk by distance transform, halved."""
    best = None
    bverts = [vertex_xy(v, dom.eps) for w in dom.walks for v in w[:-1]]
    bx = np.array([p[0] for p in bverts])
    by = np.array([p[1] for p in bverts])
    for c in dom.cells:
        x, y = cell_xy(c, dom.eps)
        d = float(np.min(np.hypot(bx - x, by - y)))
        key = (-d, c)
        if best is None or key < best:
            best = key
    radius = -best[0]
    cell = best[1]
    disk = Disk(cell, cell_xy(cell, dom.eps), radius / 2.0)
    return disk, radius / 2.0


# ---------------------------------------------------------------------------
# cut-edge connectivity


def _adjacency_with_edges(dom: DiscreteDomain):
    if not hasattr(dom, "_adj_edges"):
        adj = []
        for c in dom.cells:
            row = []
            vs = None
            for k, nb in enumerate(neighbors(c)):
                j = dom.cell_id.get(nb)
                if j is not None:
                    if vs is None:
                        from .hexlattice import cell_vertices

                        vs = cell_vertices(c)
                    e = make_edge(vs[k], vs[(k + 1) % 6])
                    row.append((j, e))
            adj.append(row)
        dom._adj_edges = adj
    return dom._adj_edges


def component_labels(dom: DiscreteDomain, cut: frozenset) -> np.ndarray:
    """Connected-component labels with adjacency blocked across cut edges."""
    adj = _adjacency_with_edges(dom)
    n = len(dom.cells)
    labels = np.full(n, -1, dtype=np.int32)
    nxt = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        labels[start] = nxt
        stack = [start]
        while stack:
            v = stack.pop()
            for j, e in adj[v]:
                if labels[j] < 0 and e not in cut:
                    labels[j] = nxt
                    stack.append(j)
        nxt += 1
    return labels


def cut_separates(dom: DiscreteDomain, cut: frozenset, cells_a, cells_b) -> bool:
    labels = component_labels(dom, cut)
    la = {int(labels[dom.cell_id[c]]) for c in cells_a}
    lb = {int(labels[dom.cell_id[c]]) for c in cells_b}
    return not (la & lb)


def edges_to_paths(edge_set: Iterable[LatticeEdge]) -> list:
    """Decompose an edge set into maximal simple paths (or cycles)."""
    incid: Dict[tuple, list] = {}
    for e in edge_set:
        incid.setdefault(e.a, []).append(e)
        incid.setdefault(e.b, []).append(e)
    unused = set(edge_set)
    paths = []
    # open paths first: start at odd-degree vertices
    for start in sorted(v for v, es in incid.items() if len(es) % 2 == 1):
        while any(e in unused for e in incid[start]):
            path = [start]
            v = start
            while True:
                nxt = [e for e in incid[v] if e in unused]
                if not nxt:
                    break
                e = nxt[0]
                unused.discard(e)
                v = e.b if e.a == v else e.a
                path.append(v)
            if len(path) > 1:
                paths.append(SegmentPath(path))
    # leftover cycles
    while unused:
        e0 = min(unused)
        unused.discard(e0)
        path = [e0.a, e0.b]
        v = e0.b
        while v != path[0]:
            nxt = [e for e in incid[v] if e in unused]
            if not nxt:
                break
            e = nxt[0]
            unused.discard(e)
            v = e.b if e.a == v else e.a
            path.append(v)
        paths.append(SegmentPath(path))
    return paths


# ---------------------------------------------------------------------------
# sliding (the basic neighborhood step)


def _box_half_sides(ell: int) -> tuple:
    # centered box of side 2*ell cell widths, in integer vertex units
    return 2 * ell, int(round(2.0 * SQRT3 * ell))


def _slide_neighborhood(dom, comp_ok, fringe_pairs, ell: int) -> set:
    """Cells of the target component within the ell-box of some fringe cell."""
    adj = _adjacency_with_edges(dom)
    hx, hy = _box_half_sides(ell)
    out = set()
    for h_id, seeds in fringe_pairs:
        cx, cy = cell_center(dom.cells[h_id])
        local = set()
        stack = []
        for s in seeds:
            if s in local or not comp_ok[s]:
                continue
            sx, sy = cell_center(dom.cells[s])
            if abs(sx - cx) <= hx and abs(sy - cy) <= hy:
                local.add(s)
                stack.append(s)
        while stack:
            v = stack.pop()
            for j, _e in adj[v]:
                if j in local or not comp_ok[j]:
                    continue
                jx, jy = cell_center(dom.cells[j])
                if abs(jx - cx) <= hx and abs(jy - cy) <= hy:
                    local.add(j)
                    stack.append(j)
        out |= local
    return out


def slide(
    dom: DiscreteDomain,
    gamma: SegmentPath,
    q_cells: Sequence[HexCell],
    qp_cells: Sequence[HexCell],
    ell: int,
    region: Optional[set] = None,
    extra_cut: frozenset = frozenset(),
    strict_margin: bool = True,
) -> SegmentPath:
    """Slide gamma by ell cells toward q', per the neighborhood construction.

    ``region`` restricts the neighborhood growth (the backslide case);
    ``extra_cut`` blocks adjacency across additional edges (the barrier
    segment).  The returned segment separates q from q'.
    """
    if ell < 1:
        raise ValueError("slide length must be >= 1")
    cut = frozenset(gamma.edges) | extra_cut
    labels = component_labels(dom, cut)
    la = {int(labels[dom.cell_id[c]]) for c in q_cells}
    lb = {int(labels[dom.cell_id[c]]) for c in qp_cells}
    if la & lb or not la or not lb:
        raise SeparationViolatedError("segment does not separate q from q'")
    lq = min(la)
    lqp = min(lb)
    if strict_margin:
        # distance precondition: q' must sit clear of the slide reach
        gv = gamma.vertices
        exact = min(
            max(abs(cell_center(c)[0] - v[0]) / 2.0, abs(cell_center(c)[1] - v[1]) / (2 * SQRT3))
            for c in qp_cells
            for v in gv
        )
        if exact <= ell + 3:
            raise TooCloseError(f"q' within {exact:.1f} <= ell+3 = {ell + 3} of the segment")
    gamma_edges = frozenset(gamma.edges)
    adj = _adjacency_with_edges(dom)
    comp_ok = labels == lqp
    if region is not None:
        reg_ids = {dom.cell_id[c] for c in region}
        comp_ok = comp_ok & np.array(
            [i in reg_ids for i in range(len(dom.cells))], dtype=bool
        )
    # fringe: q-side cells with an edge on gamma, paired with their across seeds
    fringe_pairs = []
    for i, c in enumerate(dom.cells):
        if labels[i] != lq:
            continue
        seeds = [j for j, e in adj[i] if e in gamma_edges and comp_ok[j]]
        if seeds:
            fringe_pairs.append((i, seeds))
    if not fringe_pairs:
        raise SeparationViolatedError("gamma has no q-side fringe into the q' component")
    ncells = _slide_neighborhood(dom, comp_ok, fringe_pairs, ell)
    # boundary of N minus (domain boundary, gamma, barrier): edges N <-> (q' comp \ N)
    cand_edges = set()
    for i in ncells:
        for j, e in adj[i]:
            if j not in ncells and comp_ok[j] and e not in gamma_edges and e not in extra_cut:
                cand_edges.add(e)
    if not cand_edges:
        raise TooCloseError("slide swallowed the whole q' side")
    # keep the component whose removal separates: edges facing K(q'),
    # where K(q') is the q' component of the remaining cells
    rem_labels: Dict[int, int] = {}
    nxt = 0
    for i in range(len(dom.cells)):
        if not comp_ok[i] or i in ncells or i in rem_labels:
            continue
        rem_labels[i] = nxt
        stack = [i]
        while stack:
            v = stack.pop()
            for j, _e in adj[v]:
                if comp_ok[j] and j not in ncells and j not in rem_labels:
                    rem_labels[j] = nxt
                    stack.append(j)
        nxt += 1
    kq = None
    for c in qp_cells:
        i = dom.cell_id[c]
        if i in rem_labels:
            kq = rem_labels[i]
            break
    if kq is None:
        raise TooCloseError("q' was swallowed by the slide neighborhood")
    sel_edges = set()
    for i in ncells:
        for j, e in adj[i]:
            if rem_labels.get(j) == kq and e not in gamma_edges and e not in extra_cut:
                sel_edges.add(e)
    paths = edges_to_paths(sel_edges)
    seps = [
        p
        for p in paths
        if cut_separates(dom, frozenset(p.edges) | extra_cut, q_cells, qp_cells)
    ]
    if len(seps) == 1:
        return seps[0]
    if not seps and len(paths) == 1:
        raise SeparationViolatedError("slide output does not separate q from q'")
    if not seps:
        raise SeparationViolatedError(
            f"no separating component among {len(paths)} slide pieces"
        )
    # the definition promises uniqueness; break ties deterministically
    seps.sort(key=lambda p: p.vertices)
    return seps[0]


# ---------------------------------------------------------------------------
# yellow segments (the station-visible part of a slide)


def yellow_segment(
    dom: DiscreteDomain, x_seg: SegmentPath, omega: tuple, y0_edges: frozenset
) -> SegmentPath:
    """The part of x_seg reachable from omega without touching it first, with
    exits continuing to y0; returned as one connected segment."""
    omega_cells = dom.vertex_in_cells(omega)
    if not omega_cells:
        raise NotSeparatingError(f"station {omega} touches no in-domain cell")
    x_edges = frozenset(x_seg.edges)
    labels = component_labels(dom, x_edges)
    ls = {int(labels[dom.cell_id[c]]) for c in omega_cells}
    if len(ls) != 1:
        ls = {min(ls)}
    lS = min(ls)
    adj = _adjacency_with_edges(dom)
    # cells adjacent to y0 (either side); exits must reach them outside S
    y0_adj = set(int(i) for i in np.nonzero(dom.cells_adjacent_to_edges(y0_edges))[0])
    out_reach = set()
    stack = [i for i in y0_adj if labels[i] != lS]
    out_reach.update(stack)
    while stack:
        v = stack.pop()
        for j, e in adj[v]:
            if labels[j] != lS and j not in out_reach and e not in x_edges:
                out_reach.add(j)
                stack.append(j)
    # exit-capable fringe cells of S
    exitable: Dict[int, list] = {}
    for i in range(len(dom.cells)):
        if labels[i] != lS:
            continue
        good = [e for j, e in adj[i] if e in x_edges and j in out_reach]
        if good:
            exitable[i] = good
    if not exitable:
        raise NotSeparatingError("no exit-capable cell on the station side")
    # cells of S reachable from omega through non-exitable cells (stepping
    # onto an exitable cell ends the walk there)
    visible = set()
    stack = []
    for c in omega_cells:
        i = dom.cell_id[c]
        if i in exitable:
            visible.add(i)
        else:
            stack.append(i)
    seen = set(stack)
    while stack:
        v = stack.pop()
        for j, e in adj[v]:
            if labels[j] != lS or e in x_edges:
                continue
            if j in exitable:
                visible.add(j)
            elif j not in seen:
                seen.add(j)
                stack.append(j)
    y_edges = set()
    for i in visible:
        y_edges.update(exitable[i])
    if not y_edges:
        raise NotSeparatingError("yellow segment is empty")
    # contiguous bridge along x_seg: from the first to the last visible edge,
    # then the minimal extension whose removal actually separates.  Gaps of a
    # few occluded edges (pockets at cell granularity) get bridged over.
    xe = list(x_seg.edges)
    hit = [k for k, e in enumerate(xe) if e in y_edges]
    lo, hi = hit[0], hit[-1]
    targets = [dom.cells[i] for i in sorted(y0_adj)]

    def seg_between(a, b):
        return SegmentPath(x_seg.vertices[a : b + 2])

    while True:
        seg = seg_between(lo, hi)
        if cut_separates(dom, frozenset(seg.edges), omega_cells, targets):
            return seg
        if lo == 0 and hi == len(xe) - 1:
            raise NotSeparatingError("yellow segment does not separate station from y0")
        if lo > 0:
            lo -= 1
        if hi < len(xe) - 1:
            hi += 1


# ---------------------------------------------------------------------------
# ring fragments and crossing decisions


@dataclass
class Fragment:
    cells: tuple
    blue_runs: tuple  # the two boundary-arc vertex paths
    outer_adj: np.ndarray  # mask over dom cells adjacent to the outer segment
    inner_adj: np.ndarray


def ring_fragment(dom: DiscreteDomain, outer_edges: frozenset, inner_edges: frozenset) -> Fragment:
    """The topological rectangle between two separating segments."""
    cut = outer_edges | inner_edges
    labels = component_labels(dom, cut)
    out_adj = dom.cells_adjacent_to_edges(outer_edges)
    in_adj = dom.cells_adjacent_to_edges(inner_edges)
    cand = {}
    for i in range(len(dom.cells)):
        l = int(labels[i])
        st = cand.setdefault(l, [False, False])
        if out_adj[i]:
            st[0] = True
        if in_adj[i]:
            st[1] = True
    both = [l for l, st in cand.items() if st[0] and st[1]]
    if not both:
        raise GeometryDegenerateError("no component touches both segments")
    lab = min(both)
    cells = tuple(dom.cells[i] for i in range(len(dom.cells)) if labels[i] == lab)
    cs = set(cells)
    # blue runs: boundary edges of the fragment that lie on the domain boundary
    walks = _boundary_walks(sorted(cs))
    blue = []
    dom_boundary = set(dom.boundary_edges())
    for w in dom.walks[1:]:
        dom_boundary.update(make_edge(u, v) for u, v in zip(w, w[1:]))
    for w in walks:
        run = []
        runs = []
        for u, v in zip(w, w[1:]):
            e = make_edge(u, v)
            if e in dom_boundary:
                run.append(e)
            else:
                if run:
                    runs.append(run)
                run = []
        if run:
            if runs and runs[0][0] == make_edge(w[0], w[1]):
                runs[0] = run + runs[0]  # wrap-around
            else:
                runs.append(run)
        blue.extend(runs)
    mask = np.zeros(len(dom.cells), dtype=bool)
    for c in cells:
        mask[dom.cell_id[c]] = True
    return Fragment(
        cells,
        tuple(tuple(r) for r in blue),
        out_adj & mask,
        in_adj & mask,
    )


class DecisionSampler:
    """Per-decision Monte Carlo crossing estimates with a deterministic
    stream schedule; every decision is logged."""

    def __init__(self, dom: DiscreteDomain, stream: int, samples: int):
        self.dom = dom
        self.stream = int(stream) & (2**64 - 1)
        self.samples = samples
        self.counter = 0
        self.log: List[dict] = []

    def _subgraph(self, cells: Sequence[HexCell]):
        ids = sorted(self.dom.cell_id[c] for c in cells)
        local = {g: i for i, g in enumerate(ids)}
        adj = _adjacency_with_edges(self.dom)
        indptr = np.zeros(len(ids) + 1, dtype=np.int32)
        flat = []
        for i, g in enumerate(ids):
            row = sorted(local[j] for j, _e in adj[g] if j in local)
            flat.extend(row)
            indptr[i + 1] = indptr[i] + len(row)
        return ids, local, indptr, np.array(flat, dtype=np.int32)

    def crossing(
        self,
        cells: Sequence[HexCell],
        src_mask_global: np.ndarray,
        tgt_mask_global: np.ndarray,
        color: int,
        context: str,
    ) -> ProbEstimate:
        ids, local, indptr, indices = self._subgraph(cells)
        nn = len(ids)
        src = np.zeros(nn, dtype=bool)
        tgt = np.zeros(nn, dtype=bool)
        for g, i in local.items():
            if src_mask_global[g]:
                src[i] = True
            if tgt_mask_global[g]:
                tgt[i] = True
        fixed = np.full(nn, -1, dtype=np.int8)
        keys = np.array(ids, dtype=np.uint64)  # global keys: cross-ring independence
        dec = self.counter
        self.counter += 1
        per = kernels.crossing_hits(
            indptr,
            indices,
            fixed,
            keys,
            src,
            tgt,
            np.uint8(color),
            np.uint64(self.stream),
            np.uint64(dec * self.samples),
            self.samples,
            min(kernels.DEFAULT_CHUNKS, self.samples),
        )
        est = ProbEstimate.from_hits(int(kernels.sum_chunks(per)), self.samples)
        self.log.append(
            {"decision": dec, "context": context, "mean": est.mean, "stderr": est.stderr}
        )
        return est

    def segment_crossing(
        self, outer: frozenset, inner: frozenset, color: int, context: str
    ) -> tuple:
        frag = ring_fragment(self.dom, outer, inner)
        est = self.crossing(frag.cells, frag.outer_adj, frag.inner_adj, color, context)
        return est, frag

    def to_station(self, seg_edges: frozenset, omega: tuple, context: str) -> ProbEstimate:
        labels = component_labels(self.dom, seg_edges)
        omega_cells = self.dom.vertex_in_cells(omega)
        lS = int(labels[self.dom.cell_id[omega_cells[0]]])
        cells = [self.dom.cells[i] for i in range(len(self.dom.cells)) if labels[i] == lS]
        seg_adj = self.dom.cells_adjacent_to_edges(seg_edges)
        om = np.zeros(len(self.dom.cells), dtype=bool)
        for c in omega_cells:
            om[self.dom.cell_id[c]] = True
        return self.crossing(cells, seg_adj, om, YELLOW, context)


# ---------------------------------------------------------------------------
# segments, rings, systems


@dataclass
class HarrisSegment:
    path: SegmentPath
    kind: str  # INITIAL | PERMANENT | TEMPORARY | EFFECTIVE | BOXED
    J: Optional[int] = None

    @property
    def edge_set(self) -> frozenset:
        return frozenset(self.path.edges)

    @property
    def diameter(self) -> float:
        return diameter_cells(self.path.vertices)

    def endpoints(self) -> tuple:
        return (self.path.vertices[0], self.path.vertices[-1])


@dataclass
class BoxTiling:
    b_cells: int
    full_boxes: tuple
    partial_boxes: tuple
    deleted_boxes: tuple
    percolating: tuple
    corridor_length: Optional[int]
    full_layer_ok: bool


@dataclass
class HarrisRing:
    index: int
    outer: HarrisSegment
    inner: HarrisSegment
    fragment_cells: tuple
    blue_runs: tuple
    yellow_cross_prob: ProbEstimate
    boxes: Optional[BoxTiling]
    J: int
    b: int
    blue_sep_prob: Optional[ProbEstimate] = None
    notes: dict = field(default_factory=dict)


@dataclass
class HarrisSystem:
    station: tuple
    disk: Disk
    rings: List[HarrisRing]
    termination: str  # RING_CAP | NEAR_OMEGA | STUCK
    config: HarrisConfig
    domain: DiscreteDomain
    decisions: List[dict]
    error: Optional[str] = None

    def segments(self) -> list:
        segs = []
        if self.rings:
            segs.append(self.rings[0].outer)
        for r in self.rings:
            segs.append(r.inner)
        return segs

    def to_dict(self) -> dict:
        return {
            "station": list(self.station),
            "disk": {
                "center": list(self.disk.xy),
                "delta": self.disk.delta,
                "center_cell": list(self.disk.center_cell),
            },
            "termination": self.termination,
            "error": self.error,
            "config": {
                "theta": self.config.theta,
                "delta": self.config.delta,
                "B": self.config.B,
                "r": self.config.r,
                "samples_per_decision": self.config.samples_per_decision,
                "gamma": self.config.gamma,
            },
            "rings": [
                {
                    "index": r.index,
                    "J": r.J,
                    "b": r.b,
                    "outer_kind": r.outer.kind,
                    "inner_kind": r.inner.kind,
                    "outer_vertices": [list(v) for v in r.outer.path.vertices],
                    "inner_vertices": [list(v) for v in r.inner.path.vertices],
                    "outer_diameter_cells": r.outer.diameter,
                    "inner_diameter_cells": r.inner.diameter,
                    "fragment_size": len(r.fragment_cells),
                    "yellow_cross": [r.yellow_cross_prob.mean, r.yellow_cross_prob.stderr],
                    "blue_sep": (
                        [r.blue_sep_prob.mean, r.blue_sep_prob.stderr]
                        if r.blue_sep_prob
                        else None
                    ),
                    "boxes": (
                        {
                            "b_cells": r.boxes.b_cells,
                            "full": len(r.boxes.full_boxes),
                            "partial": len(r.boxes.partial_boxes),
                            "deleted": len(r.boxes.deleted_boxes),
                            "percolating": len(r.boxes.percolating),
                            "corridor_length": r.boxes.corridor_length,
                            "full_layer_ok": r.boxes.full_layer_ok,
                        }
                        if r.boxes
                        else None
                    ),
                    "notes": r.notes,
                }
                for r in self.rings
            ],
            "decisions": self.decisions,
        }


# ---------------------------------------------------------------------------
# the S construction


def s_construct(
    dom: DiscreteDomain,
    y_prev: HarrisSegment,
    omega: tuple,
    cfg: HarrisConfig,
    disk: Disk,
    sampler: DecisionSampler,
    window: Optional[tuple] = None,
) -> tuple:
    """Slide toward the station until the crossing window is hit.

    Returns (segment, J, trace).  Raises WindowUnreachableError when neither
    sliding nor backsliding lands inside the window.
    """
    lo_w, hi_w = window if window is not None else cfg.window
    q_cells = [disk.center_cell]
    omega_cells = list(dom.vertex_in_cells(omega))
    trace: List[dict] = []

    def candidate(ell: int) -> tuple:
        x = slide(dom, y_prev.path, q_cells, omega_cells, ell, strict_margin=False)
        y = yellow_segment(dom, x, omega, y_prev.edge_set)
        est, frag = sampler.segment_crossing(
            y_prev.edge_set, frozenset(y.edges), YELLOW, f"slide ell={ell}"
        )
        trace.append({"ell": ell, "p": est.mean, "stderr": est.stderr})
        return y, est

    # geometric pre-search; the slide itself objects once the neighborhood
    # swallows the station, which shrinks the reach during the search
    max_ell = int(diameter_cells(cell_center(c) for c in dom.cells)) + 2

    cache: Dict[int, tuple] = {}

    def probe(ell: int) -> tuple:
        if ell not in cache:
            cache[ell] = candidate(ell)
        return cache[ell]

    geom_errors = (TooCloseError, SeparationViolatedError, NotSeparatingError)
    try:
        _, est = probe(1)
    except geom_errors:
        raise ScaleExhaustedError("no room for the first slide", trace)
    if est.mean < hi_w:
        if est.mean > lo_w:
            y, _ = probe(1)
            return HarrisSegment(y, "TEMPORARY", 1), 1, trace
        # one step already jumped below the window: no room to backslide
        raise WindowUnreachableError("window jumped at the first slide", trace)
    ell = 1
    lo = 1
    hi = None
    while hi is None:
        nxt = min(2 * ell, max_ell)
        if nxt <= lo:
            break
        try:
            _, est = probe(nxt)
        except geom_errors:
            max_ell = nxt - 1
            ell = lo
            if max_ell <= lo:
                break
            continue
        ell = nxt
        if est.mean < hi_w:
            hi = nxt
        else:
            lo = nxt
            if nxt >= max_ell:
                break
    if hi is None:
        # the remaining gap to the station cannot be split at this lattice
        # spacing; the caller treats this as the near-station stop
        raise ScaleExhaustedError(
            f"crossing stayed above the window up to ell={max_ell}", trace
        )
    # bisect to the first index below the upper edge
    while hi - lo > 1:
        mid = (lo + hi) // 2
        try:
            _, est = probe(mid)
        except geom_errors:
            lo = mid
            continue
        if est.mean < hi_w:
            hi = mid
        else:
            lo = mid
    y, est = probe(hi)
    if est.mean > lo_w:
        return HarrisSegment(y, "TEMPORARY", hi), hi, trace
    # jumped across the window: backslide behind the half-way barrier
    return _backslide(dom, y_prev, omega, cfg, disk, sampler, hi, cache, trace, (lo_w, hi_w))


def _backslide(dom, y_prev, omega, cfg, disk, sampler, j_jump, cache, trace, window):
    lo_w, hi_w = window
    L = max(1, math.ceil(j_jump / 2))
    q_cells = [disk.center_cell]
    omega_cells = list(dom.vertex_in_cells(omega))
    # barrier: the yellow segment at the half separation, which still crosses easily
    while L >= 1:
        if L in cache:
            z_seg, z_est = cache[L]
        else:
            x = slide(dom, y_prev.path, q_cells, omega_cells, L)
            z_seg = yellow_segment(dom, x, omega, y_prev.edge_set)
            z_est, _ = sampler.segment_crossing(
                y_prev.edge_set, frozenset(z_seg.edges), YELLOW, f"barrier L={L}"
            )
            cache[L] = (z_seg, z_est)
        if z_est.mean > hi_w:
            break
        if lo_w < z_est.mean < hi_w:
            trace.append({"barrier_as_result": L, "p": z_est.mean})
            return HarrisSegment(z_seg, "TEMPORARY", L), L, trace
        L -= 1
    if L < 1:
        raise WindowUnreachableError("no barrier position crosses easily", trace)
    z_seg, _ = cache[L]
    f_seg, _ = cache[j_jump]
    # region bounded by the barrier and the overshot segment; a cell next to
    # the barrier inside it stands in for the "toward y_prev" side
    frag = ring_fragment(dom, frozenset(z_seg.edges), frozenset(f_seg.edges))
    region = set(frag.cells)
    z_adj = dom.cells_adjacent_to_edges(frozenset(z_seg.edges))
    back_targets = [c for c in frag.cells if z_adj[dom.cell_id[c]]]
    if not back_targets:
        raise WindowUnreachableError("no room between barrier and overshoot", trace)
    g = f_seg
    p_prev = None
    for j in range(1, 4 * (j_jump - L) + 8):
        try:
            gx = slide(
                dom,
                g,
                omega_cells,
                back_targets,
                1,
                region=region,
                extra_cut=frozenset(z_seg.edges),
                strict_margin=False,
            )
        except (TooCloseError, SeparationViolatedError) as e:
            raise WindowUnreachableError(f"backslide failed: {e}", trace)
        gy = yellow_segment(dom, gx, omega, y_prev.edge_set)
        est, _ = sampler.segment_crossing(
            y_prev.edge_set, frozenset(gy.edges), YELLOW, f"backslide j={j}"
        )
        trace.append({"backslide": j, "p": est.mean, "stderr": est.stderr, "prev": p_prev})
        if lo_w < est.mean < hi_w:
            return HarrisSegment(gy, "TEMPORARY", L), L, trace
        if est.mean >= hi_w:
            # overshot upward; the finest granularity cannot resolve the window
            raise WindowUnreachableError("backslide overshot the window", trace)
        p_prev = est.mean
        g = gx
    raise WindowUnreachableError("backsliding exhausted all positions", trace)


# ---------------------------------------------------------------------------
# the Q construction (effective regions)


def _fragment_face_runs(dom, frag_cells, y_i_edges, y_f_edges):
    """Boundary cycle of the fragment split into Y_I / Y_F / blue runs."""
    walk = _boundary_walks(sorted(frag_cells))[0]
    kinds = []
    for u, v in zip(walk, walk[1:]):
        e = make_edge(u, v)
        kinds.append("F" if e in y_f_edges else ("I" if e in y_i_edges else "B"))
    # rotate so the cycle starts at a kind change
    m = len(kinds)
    start = 0
    for i in range(m):
        if kinds[i] != kinds[i - 1]:
            start = i
            break
    verts = [walk[(start + i) % m] for i in range(m + 1)]
    kinds = [kinds[(start + i) % m] for i in range(m)]
    runs = []
    i = 0
    while i < m:
        j = i
        while j < m and kinds[j] == kinds[i]:
            j += 1
        runs.append((kinds[i], verts[i : j + 1]))
        i = j
    return runs


def _tau_path(dom, frag_set, start_v, targets, hx, hy, center, avoid) -> Optional[list]:
    """Edge path inside one box from start_v to any target vertex, through the
    fragment, avoiding the given vertex set."""
    from .hexlattice import vertex_neighbors

    def in_box(v):
        return abs(v[0] - center[0]) <= hx and abs(v[1] - center[1]) <= hy

    def usable(u, v):
        for c in dom.vertex_in_cells(u):
            if c in frag_set and make_edge(u, v) in cell_edges(c):
                return True
        for c in dom.vertex_in_cells(v):
            if c in frag_set and make_edge(u, v) in cell_edges(c):
                return True
        return False

    prev = {start_v: None}
    queue = [start_v]
    while queue:
        u = queue.pop(0)
        if u in targets and u != start_v:
            path = [u]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return path[::-1]
        for v in vertex_neighbors(u):
            if v in prev or not in_box(v) or (v in avoid and v not in targets):
                continue
            if not usable(u, v):
                continue
            prev[v] = u
            queue.append(v)
    return None


def q_construct(
    dom: DiscreteDomain,
    y_i: HarrisSegment,
    y_f: HarrisSegment,
    j_f: int,
    cfg: HarrisConfig,
    sampler: DecisionSampler,
    disk: Disk,
    omega: tuple,
) -> tuple:
    """Effective-region trimming of an oversized successor segment.

    Returns (segment, info).  When the diameter is within 3B * J_F the input
    is returned unchanged.  Raises GeometryDegenerateError when the box
    ordering claim fails (logged by the caller, never silently repaired).
    """
    B = cfg.B
    info = {"applied": False, "diameter_cells": y_f.diameter, "threshold": 3 * B * j_f}
    if y_f.diameter <= 3 * B * j_f:
        return y_f, info
    frag = ring_fragment(dom, y_i.edge_set, y_f.edge_set)
    frag_set = set(frag.cells)
    runs = _fragment_face_runs(dom, frag.cells, y_i.edge_set, y_f.edge_set)
    f_runs = [r for r in runs if r[0] == "F"]
    if not f_runs:
        raise GeometryDegenerateError("fragment has no Y_F face")
    f_run = max(f_runs, key=lambda r: len(r[1]))
    fverts = f_run[1]
    # blue vertex sets on the two sides of the principal face, in cycle order
    order = {("F", tuple(fverts)): None}
    idx = runs.index(f_run)
    m = len(runs)

    def side_vertices(direction):
        out = []
        k = idx
        for _ in range(m - 1):
            k = (k + direction) % m
            kind, verts = runs[k]
            if kind == "F" or kind == "I":
                break
            out.extend(verts)
        return set(out)

    blue_after = side_vertices(+1)   # side at fverts[-1]
    blue_before = side_vertices(-1)  # side at fverts[0]
    jp = j_f + 2
    hx, hy = _box_half_sides(jp)

    def boxes_from(end_verts, blue_set):
        centers = [end_verts[0]]
        for v in end_verts:
            c = centers[-1]
            if abs(v[0] - c[0]) > 2 * hx or abs(v[1] - c[1]) > 2 * hy:
                centers.append(v)
        hits = [
            any(abs(b[0] - c[0]) <= hx and abs(b[1] - c[1]) <= hy for b in blue_set)
            for c in centers
        ]
        return centers, hits

    y_path = list(y_f.path.vertices)
    if fverts[0] not in y_path or fverts[-1] not in y_path:
        raise GeometryDegenerateError("fragment face is not part of the segment")

    def build_tau(end_at_last):
        end_verts = fverts[::-1] if end_at_last else fverts
        blue_set = blue_after if end_at_last else blue_before
        centers, hits = boxes_from(end_verts, blue_set)
        s = -1
        for i, h in enumerate(hits):
            if h:
                s = i
        if s <= 0:
            return None  # the whole side is already close to its blue boundary
        if not all(hits[: s + 1]):
            raise GeometryDegenerateError(
                "blue boundary skips a box before its last visit"
            )
        # step back toward the end to the first box farther than B * J_F
        attach = None
        cs = centers[s]
        for i in range(s - 1, -1, -1):
            d = max(
                abs(centers[i][0] - cs[0]) / 2.0,
                abs(centers[i][1] - cs[1]) / (2 * SQRT3),
            )
            if d > B * j_f:
                attach = centers[i]
                break
        if attach is None:
            return None  # short tail, keep whole
        # the chosen vertex may have its only off-segment edge facing away
        # from the fragment; scan its neighborhood along the face for one
        # that can start a path
        base_idx = end_verts.index(attach)
        for off in (0, 1, -1, 2, -2, 3, -3):
            i2 = base_idx + off
            if not (0 <= i2 < len(end_verts)):
                continue
            cand = end_verts[i2]
            tau = _tau_path(
                dom, frag_set, cand, blue_set, hx, hy, cand, avoid=set(y_path)
            )
            if tau is not None:
                return cand, tau
        raise GeometryDegenerateError("no tau path from the segment to the boundary")

    right = build_tau(end_at_last=False)
    left = build_tau(end_at_last=True)
    if right is not None and left is not None:
        # orient the stored segment like the fragment face before splicing
        if y_path.index(right[0]) > y_path.index(left[0]):
            y_path.reverse()
    i0, i1 = 0, len(y_path) - 1
    pre: list = []
    post: list = []
    if right is not None:
        i0 = y_path.index(right[0])
        pre = right[1][::-1][:-1]  # boundary ... attach (attach kept from y_path)
    if left is not None:
        i1 = y_path.index(left[0])
        post = left[1][1:]
    if i0 >= i1:
        raise GeometryDegenerateError("effective region attachments crossed")
    new_vertices = pre + y_path[i0 : i1 + 1] + post
    seg = SegmentPath(new_vertices)
    omega_cells = dom.vertex_in_cells(omega)
    if not cut_separates(dom, frozenset(seg.edges), [disk.center_cell], omega_cells):
        raise GeometryDegenerateError("effective region does not separate")
    eff = HarrisSegment(seg, "EFFECTIVE", j_f)
    est, _ = sampler.segment_crossing(y_i.edge_set, eff.edge_set, YELLOW, "q_construct check")
    info.update(
        applied=True,
        new_diameter_cells=eff.diameter,
        crossing=[est.mean, est.stderr],
        lower_ok=bool(eff.diameter >= j_f / B - 1),
        upper_ok=bool(eff.diameter <= (3 * B + 2) * j_f + cfg.kappa_slack),
    )
    return eff, info


# ---------------------------------------------------------------------------
# the R construction (percolative boxes)


def _box_key(x, y, bx, by):
    return (x // bx if x >= 0 else -((-x - 1) // bx + 1), y // by if y >= 0 else -((-y - 1) // by + 1))


def r_construct(
    dom: DiscreteDomain,
    y_i: HarrisSegment,
    y_f: HarrisSegment,
    j_f: int,
    cfg: HarrisConfig,
    disk: Disk,
    omega: tuple,
) -> tuple:
    """Box refinement: re-wall the fragment along a grid one full box layer
    away from y_f, and certify the corridor of full boxes."""
    b = max(1, round(2.0 ** (-2 * cfg.r) * j_f))
    bx = 2 * b
    by = max(1, int(round(2 * SQRT3 * b)))
    frag = ring_fragment(dom, y_i.edge_set, y_f.edge_set)
    frag_set = set(frag.cells)

    cells_by_box: Dict[tuple, list] = {}
    for c in frag.cells:
        cx, cy = cell_center(c)
        cells_by_box.setdefault(_box_key(cx, cy, bx, by), []).append(c)

    def box_full(key) -> bool:
        # full when every lattice center in the box belongs to the fragment
        i, j = key
        x0, x1 = i * bx, (i + 1) * bx
        y0, y1 = j * by, (j + 1) * by
        found = False
        r0 = -(-y0 // 3)
        for r in range(r0, (y1 - 1) // 3 + 1):
            cy = 3 * r
            q0 = -(-(x0 - r) // 2)
            for q in range(q0, (x1 - 1 - r) // 2 + 1):
                found = True
                if HexCell(q, r) not in frag_set:
                    return False
        return found

    status = {k: ("FULL" if box_full(k) else "PARTIAL") for k in cells_by_box}
    # delete boxes meeting y_f (via its adjacent cells) and their *-neighbors;
    # in the thin-ring regime (box side comparable to the separation) the
    # *-expansion would eat the whole fragment, so it is skipped and the
    # full-layer guarantee recorded as absent
    yf_adj = dom.cells_adjacent_to_edges(y_f.edge_set)
    d0 = set()
    for i in np.nonzero(yf_adj)[0]:
        cx, cy = cell_center(dom.cells[int(i)])
        d0.add(_box_key(cx, cy, bx, by))
    expand = 4 * b < j_f
    deleted = set(d0)
    if expand:
        for (i, j) in d0:
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    deleted.add((i + di, j + dj))
    deleted &= set(cells_by_box)

    # the new segment: boundary of (omega side of y_f) + (fragment cells in
    # deleted boxes), facing the disk side
    labels = component_labels(dom, y_f.edge_set)
    omega_cells = dom.vertex_in_cells(omega)
    l_omega = int(labels[dom.cell_id[omega_cells[0]]])
    m_ids = set(int(i) for i in np.nonzero(labels == l_omega)[0])
    for k in deleted:
        for c in cells_by_box.get(k, ()):
            m_ids.add(dom.cell_id[c])
    adj = _adjacency_with_edges(dom)
    dom_boundary = set(dom.boundary_edges())
    rem_labels: Dict[int, int] = {}
    nxt = 0
    for i in range(len(dom.cells)):
        if i in m_ids or i in rem_labels:
            continue
        rem_labels[i] = nxt
        stack = [i]
        while stack:
            v = stack.pop()
            for jj, _e in adj[v]:
                if jj not in m_ids and jj not in rem_labels:
                    rem_labels[jj] = nxt
                    stack.append(jj)
        nxt += 1
    kq = rem_labels.get(dom.cell_id[disk.center_cell])
    if kq is None:
        raise NoBoxPathError("deleted boxes swallowed the disk side", {"b": b})
    sel = set()
    for i in m_ids:
        for jj, e in adj[i]:
            if rem_labels.get(jj) == kq:
                sel.add(e)
    paths = edges_to_paths(sel)
    seps = [
        p for p in paths if cut_separates(dom, frozenset(p.edges), [disk.center_cell], omega_cells)
    ]
    if not seps:
        raise NoBoxPathError("box wall does not separate", {"pieces": len(paths)})
    seps.sort(key=lambda p: p.vertices)
    y_b = HarrisSegment(seps[0], "BOXED", j_f)
    if y_b.edge_set & y_i.edge_set:
        # the deletion band ate the whole fragment and the wall collapsed
        # onto the outer segment; no box refinement fits this ring
        raise NoBoxPathError("box band ate the fragment", {"b": b, "J": j_f})

    # corridor of full boxes between y_i and y_b
    kept_full = {k for k, s in status.items() if s == "FULL" and k not in deleted}
    yi_adj = dom.cells_adjacent_to_edges(y_i.edge_set)
    yb_adj = dom.cells_adjacent_to_edges(y_b.edge_set)

    def boxes_touching(mask):
        out = set()
        for i in np.nonzero(mask)[0]:
            c = dom.cells[int(i)]
            if c in frag_set:
                cx, cy = cell_center(c)
                k = _box_key(cx, cy, bx, by)
                if k in kept_full:
                    out.add(k)
        return out

    start = boxes_touching(yi_adj)
    goal = boxes_touching(yb_adj)
    dist = {k: 0 for k in start}
    queue = list(start)
    while queue:
        k = queue.pop(0)
        i, j = k
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nk = (i + di, j + dj)
            if nk in kept_full and nk not in dist:
                dist[nk] = dist[k] + 1
                queue.append(nk)
    reached = [dist[k] for k in goal if k in dist]
    if not reached and goal:
        raise NoBoxPathError(
            "no full-box corridor joins the segments",
            {"b": b, "full": len(kept_full), "start": len(start), "goal": len(goal)},
        )
    corridor = max(reached) if reached else None
    yb_boxes = set()
    for i in np.nonzero(yb_adj)[0]:
        c = dom.cells[int(i)]
        cx, cy = cell_center(c)
        yb_boxes.add(_box_key(cx, cy, bx, by))
    tiling = BoxTiling(
        b_cells=b,
        full_boxes=tuple(sorted(kept_full)),
        partial_boxes=tuple(sorted(k for k, s in status.items() if s == "PARTIAL")),
        deleted_boxes=tuple(sorted(deleted)),
        percolating=tuple(sorted(dist)),
        corridor_length=corridor,
        full_layer_ok=expand and not (yb_boxes & d0),
    )
    return y_b, tiling


# ---------------------------------------------------------------------------
# base segment and the full induction


def lattice_square_cells(dom: DiscreteDomain, center_v: tuple, h_cells: int) -> list:
    hx, hy = 2 * h_cells, int(round(2 * SQRT3 * h_cells))
    out = []
    for c in dom.cells:
        cx, cy = cell_center(c)
        if abs(cx - center_v[0]) <= hx and abs(cy - center_v[1]) <= hy:
            out.append(c)
    return out


def base_segment(dom: DiscreteDomain, omega: tuple, disk: Disk) -> HarrisSegment:
    """Y_0: the separating component of the boundary of the largest lattice
    square centered at the station that still excludes the disk center, so
    the square boundary clips the central disk."""
    w = SQRT3 * dom.eps
    ox, oy = vertex_xy(omega, dom.eps)
    cx, cy = disk.xy
    linf_center = max(abs(ox - cx), abs(oy - cy))
    omega_cells = dom.vertex_in_cells(omega)
    adj = _adjacency_with_edges(dom)
    start = max(1, int((linf_center - disk.delta) / w) + 1)
    for trial in range(start, 0, -1):
        sq = set(lattice_square_cells(dom, omega, trial))
        if disk.center_cell in sq or not sq:
            continue
        edges = set()
        for c in sq:
            i = dom.cell_id[c]
            for j, e in adj[i]:
                if dom.cells[j] not in sq:
                    edges.add(e)
        for p in edges_to_paths(edges):
            if cut_separates(dom, frozenset(p.edges), [disk.center_cell], omega_cells):
                return HarrisSegment(p, "INITIAL", None)
    raise SeparationViolatedError("no base square boundary separates the station")


def build_system(dom: DiscreteDomain, omega: tuple, cfg: HarrisConfig, stream: int = 1) -> HarrisSystem:
    """Run the inductive construction stationed at a boundary vertex."""
    omega = tuple(omega)
    if omega not in set(dom.walk[:-1]):
        raise ValueError(f"station {omega} is not a boundary vertex")
    disk, _delta = central_disk(dom)
    sampler = DecisionSampler(dom, stream, cfg.samples_per_decision)
    rings: List[HarrisRing] = []
    termination = "RING_CAP"
    error = None
    try:
        y0 = base_segment(dom, omega, disk)
    except SeparationViolatedError as e:
        return HarrisSystem(omega, disk, [], "STUCK", cfg, dom, sampler.log, error=str(e))
    p_base = sampler.to_station(y0.edge_set, omega, "base case")
    if p_base.mean >= cfg.stop_theta:
        return HarrisSystem(omega, disk, [], "NEAR_OMEGA", cfg, dom, sampler.log)
    current = y0
    cap = cfg.ring_cap(dom.n)
    prev_b = None
    for k in range(1, cap + 1):
        try:
            # the box wall sits a band closer to the outer segment, raising
            # the traverse probability; re-slide with a tightened window top
            # until the boxed ring respects the blue-separation guarantee.
            # When no boxed wall can honor it at this scale, keep the plain
            # windowed segment and record the box refinement as degenerate.
            u_top = cfg.window[1]
            first = None
            for _attempt in range(6):
                try:
                    raw, j_k, trace = s_construct(
                        dom, current, omega, cfg, disk, sampler,
                        window=(cfg.window[0], u_top),
                    )
                except ScaleExhaustedError:
                    if first is None:
                        raise
                    break  # tightened window is unreachable; use the first cut
                try:
                    eff, qinfo = q_construct(dom, current, raw, j_k, cfg, sampler, disk, omega)
                except GeometryDegenerateError as e:
                    eff, qinfo = raw, {"applied": False, "degenerate": str(e)}
                if first is None:
                    first = (eff, j_k, qinfo, trace)
                try:
                    boxed, tiling = r_construct(dom, current, eff, j_k, cfg, disk, omega)
                except NoBoxPathError as e:
                    boxed, tiling = eff, None
                    qinfo = dict(qinfo, box_error=str(e))
                est, frag = sampler.segment_crossing(
                    current.edge_set, boxed.edge_set, YELLOW, f"ring {k} accept"
                )
                if est.mean <= 1.0 - cfg.theta:
                    break
                u_top = max(
                    2.2 * cfg.window[0],
                    u_top - 1.5 * (est.mean - (1.0 - cfg.theta)) - cfg.delta,
                )
            if est.mean > 1.0 - cfg.theta:
                eff, j_k, qinfo, trace = first
                boxed, tiling = eff, None
                qinfo = dict(qinfo, box_wall_degenerate=True)
                est, frag = sampler.segment_crossing(
                    current.edge_set, boxed.edge_set, YELLOW, f"ring {k} accept unboxed"
                )
        except ScaleExhaustedError:
            termination = "NEAR_OMEGA"
            break
        except (WindowUnreachableError, NoBoxPathError, NotSeparatingError,
                SeparationViolatedError, TooCloseError) as e:
            termination = "STUCK"
            error = f"ring {k}: {e}"
            break
        b_k = tiling.b_cells if tiling is not None else 1
        notes = {
            "q_construct": qinfo,
            "trace": trace,
            "diam_lower_ok": bool(boxed.diameter >= j_k / cfg.B - 1),
            "diam_upper_ok": bool(
                boxed.diameter
                <= 2.0 ** (2 * cfg.r + 1) * (3 * cfg.B + 2 + cfg.kappa_slack) * j_k
            ),
            "scale_coupling_ok": bool(prev_b is None or j_k > prev_b / 2),
        }
        rings.append(
            HarrisRing(
                index=k,
                outer=current,
                inner=boxed,
                fragment_cells=frag.cells,
                blue_runs=frag.blue_runs,
                yellow_cross_prob=est,
                boxes=tiling,
                J=j_k,
                b=b_k,
                notes=notes,
            )
        )
        prev_b = b_k
        current = HarrisSegment(boxed.path, "PERMANENT", boxed.J)
        p_omega = sampler.to_station(current.edge_set, omega, f"ring {k} station check")
        if p_omega.mean >= cfg.stop_theta:
            termination = "NEAR_OMEGA"
            break
    return HarrisSystem(omega, disk, rings, termination, cfg, dom, sampler.log, error=error)


# ---------------------------------------------------------------------------
# verification suites


def _fragment_masks(dom, ring: HarrisRing):
    ids = sorted(dom.cell_id[c] for c in ring.fragment_cells)
    local = {g: i for i, g in enumerate(ids)}
    adj = _adjacency_with_edges(dom)
    indptr = np.zeros(len(ids) + 1, dtype=np.int32)
    flat = []
    ring_cut = ring.outer.edge_set | ring.inner.edge_set
    for i, g in enumerate(ids):
        row = sorted(local[j] for j, e in adj[g] if j in local and e not in ring_cut)
        flat.extend(row)
        indptr[i + 1] = indptr[i] + len(row)
    return ids, local, indptr, np.array(flat, dtype=np.int32)


def verify_rings(sys: HarrisSystem, samples: int, stream: int) -> dict:
    """Per-ring crossing estimates plus the sealing experiment."""
    dom = sys.domain
    theta = sys.config.theta
    report = {"rings": [], "assertions": []}
    stream = int(stream) & (2**64 - 1)
    indicators = []
    for ring in sys.rings:
        ids, local, indptr, indices = _fragment_masks(dom, ring)
        nn = len(ids)
        fixed = np.full(nn, -1, dtype=np.int8)
        keys = np.array(ids, dtype=np.uint64)
        outer_mask = np.zeros(nn, dtype=bool)
        inner_mask = np.zeros(nn, dtype=bool)
        om = dom.cells_adjacent_to_edges(ring.outer.edge_set)
        im = dom.cells_adjacent_to_edges(ring.inner.edge_set)
        for g, i in local.items():
            outer_mask[i] = om[g]
            inner_mask[i] = im[g]
        runs = sorted(ring.blue_runs, key=len, reverse=True)[:2]
        b_masks = []
        for run in runs:
            mask = np.zeros(nn, dtype=bool)
            bm = dom.cells_adjacent_to_edges(frozenset(run))
            for g, i in local.items():
                mask[i] = bm[g]
            b_masks.append(mask)
        yellow_ind = kernels.crossing_indicators(
            indptr, indices, fixed, keys, outer_mask, inner_mask, np.uint8(YELLOW),
            np.uint64(stream), np.uint64(0), samples,
        )
        yellow = ProbEstimate.from_hits(int(yellow_ind.sum()), samples)
        via_duality = len(b_masks) != 2
        if not via_duality:
            ind = kernels.crossing_indicators(
                indptr, indices, fixed, keys, b_masks[0], b_masks[1], np.uint8(BLUE),
                np.uint64(stream), np.uint64(0), samples,
            )
            blue = ProbEstimate.from_hits(int(ind.sum()), samples)
            duality_gap = float(np.mean(ind.astype(bool) == yellow_ind.astype(bool)))
        else:
            # degenerate boundary runs (segments share an anchor): read the
            # blue separation off the exact traverse duality
            ind = (1 - yellow_ind).astype(np.uint8)
            blue = ProbEstimate.from_hits(int(ind.sum()), samples)
            duality_gap = None
        indicators.append(ind)
        ring.blue_sep_prob = blue
        ok = blue.mean >= theta - 4 * max(blue.stderr, 1e-9)
        report["rings"].append(
            {
                "index": ring.index,
                "yellow_traverse": [yellow.mean, yellow.stderr],
                "blue_separation": [blue.mean, blue.stderr],
                "blue_runs": len(ring.blue_runs),
                "via_duality": via_duality,
                "duality_agreement": duality_gap,
                "blue_above_theta": bool(ok),
            }
        )
        report["assertions"].append(
            {"ring": ring.index, "check": "blue_sep >= theta - 4se", "ok": bool(ok)}
        )
    m = min(5, len(indicators))
    if m >= 1:
        joint = np.zeros(samples, dtype=bool)
        for ind in indicators[:m]:
            joint |= ind.astype(bool)
        p_any = float(joint.mean())
        bound = 1.0 - (1.0 - theta) ** m
        report["sealing"] = {
            "m": m,
            "p_any_blue": p_any,
            "independence_bound": bound,
            "ok": bool(p_any >= bound - 4 * math.sqrt(0.25 / samples)),
        }
    return report


def count_separating_rings(sys: HarrisSystem, s) -> int:
    """Number of system segments separating s from the central disk."""
    dom = sys.domain
    if isinstance(s, HexCell) or (isinstance(s, tuple) and len(s) == 2 and s in dom.cell_id):
        cell = HexCell(*s)
    else:
        cells = dom.vertex_in_cells(tuple(s))
        if not cells:
            return 0
        cell = cells[0]
    count = 0
    for seg in sys.segments():
        if cut_separates(dom, seg.edge_set, [cell], [sys.disk.center_cell]):
            count += 1
    return count


_CORNER_OF = {
    frozenset(("DA", "AB")): "A",
    frozenset(("AB", "BC")): "B",
    frozenset(("BC", "CD")): "C",
    frozenset(("CD", "DA")): "D",
}


def classify_endpoints(sys: HarrisSystem, dom: DiscreteDomain) -> dict:
    """Which boundary arcs the segment endpoints land on, for a system
    stationed at the marked point A."""
    out = {"segments": [], "v": 0, "conflicts": []}
    corners_seen = set()
    for seg in sys.segments():
        e0, e1 = seg.endpoints()
        a0 = set(dom.arc_of_vertex(e0))
        a1 = set(dom.arc_of_vertex(e1))
        spanning = ("DA" in a0 and "AB" in a1) or ("AB" in a0 and "DA" in a1)
        same_arc = bool(a0 & a1) and not spanning
        if spanning:
            cls = "CONDUIT"
        elif same_arc:
            cls = "SAME_ARC"
        else:
            cls = "OTHER"
        if not spanning:
            out["v"] += 1
        corner = None
        for p0 in a0:
            for p1 in a1:
                key = frozenset((p0, p1))
                if key in _CORNER_OF:
                    corner = _CORNER_OF[key]
        if corner and corner != "A":
            corners_seen.add(corner)
        out["segments"].append(
            {
                "kind": seg.kind,
                "endpoint_arcs": [sorted(a0), sorted(a1)],
                "class": cls,
                "corner": corner,
            }
        )
    adjacent = {("B", "C"), ("C", "B"), ("C", "D"), ("D", "C"), ("B", "D"), ("D", "B")}
    for x in corners_seen:
        for y in corners_seen:
            if x != y and (x, y) in adjacent:
                out["conflicts"].append((x, y))
    out["conflicts"] = sorted(set(tuple(sorted(c)) for c in out["conflicts"]))
    return out
