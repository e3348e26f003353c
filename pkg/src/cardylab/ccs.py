"""The three separating-crossing observables and their complexification.

For a domain with marked points A, B, C, D the triangle observables are,
with A temporarily ignored (the (D,B) boundary is the union of the DA and
AB arcs):

* ``sB(z)``: yellow crossing from (D,B) to (B,C) separating z from (C,D)
* ``sC(z)``: yellow crossing from (B,C) to (C,D) separating z from (D,B)
* ``sD(z)``: yellow crossing from (C,D) to (D,B) separating z from (B,C)

and the complex field ``sn = sB + tau*sC + tau^2*sD`` with tau = exp(2*pi*i/3).
All three events are evaluated on the same coloring samples (common random
numbers), so pointwise algebraic identities hold sample-wise, not just in
the mean; in particular the indicator of the sC event at a vertex on the
(D,B) boundary is identically zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .domain import DiscreteDomain
from .hexlattice import vertex_xy
from .percolation import (
    YELLOW,
    ProbEstimate,
    _NodeLayout,
    _witness_incidence,
)

TAU = complex(-0.5, math.sqrt(3.0) / 2.0)

#: (source1 arcs, source2 arcs, avoid arcs, junction mark) per component.
COMPONENTS = {
    "B": (("DA", "AB"), ("BC",), ("CD",), "B"),
    "C": (("BC",), ("CD",), ("DA", "AB"), "C"),
    "D": (("CD",), ("DA", "AB"), ("BC",), "D"),
}


class PointOutsideDomainError(ValueError):
    """POINT_OUTSIDE_DOMAIN: a requested vertex has no in-domain cell."""


class PointNotEstimatedError(KeyError):
    """POINT_NOT_ESTIMATED: the vertex is not part of the estimated field."""


class InsufficientPairsError(ValueError):
    """INSUFFICIENT_PAIRS: not enough close point pairs for the profile."""


@dataclass
class CcsField:
    """Per-vertex estimates of the three components and the complex field."""

    domain: DiscreteDomain
    points: tuple
    hits: np.ndarray  # (3, P) int64, component order B, C, D
    block_hits: np.ndarray  # (nblocks, 3, P)
    samples: int
    stream: int

    def __post_init__(self):
        self._index = {p: i for i, p in enumerate(self.points)}

    @property
    def n(self) -> int:
        return self.domain.n

    def index(self, at) -> int:
        try:
            return self._index[tuple(at)]
        except KeyError:
            raise PointNotEstimatedError(f"{at} was not estimated") from None

    def component(self, name: str, at) -> ProbEstimate:
        k = "BCD".index(name)
        return ProbEstimate.from_hits(int(self.hits[k, self.index(at)]), self.samples)

    def means(self) -> np.ndarray:
        """(3, P) component means."""
        return self.hits / float(self.samples)

    def sn(self) -> np.ndarray:
        """Complex field values, sB + tau*sC + tau^2*sD per point."""
        m = self.means()
        return m[0] + TAU * m[1] + TAU * TAU * m[2]

    def sn_at(self, at) -> complex:
        i = self.index(at)
        m = self.hits[:, i] / float(self.samples)
        return complex(m[0] + TAU * m[1] + TAU * TAU * m[2])

    def point_xy(self) -> np.ndarray:
        return np.array([vertex_xy(p, self.domain.eps) for p in self.points])

    def barycentric_defect(self) -> float:
        m = self.means()
        return float(np.max(np.abs(m.sum(axis=0) - 1.0)))

    def block_means(self) -> np.ndarray:
        """(nblocks, 3, P) per-block component means (batch means under CRN)."""
        nb = self.block_hits.shape[0]
        per = np.diff(np.linspace(0, self.samples, nb + 1).astype(int))
        return self.block_hits / per[:, None, None]


def estimate_ccs(
    dom: DiscreteDomain,
    pts: Sequence,
    samples: int,
    stream: int,
    index0: int = 0,
    nblocks: int = 16,
    nchunks: int = kernels.DEFAULT_CHUNKS,
) -> CcsField:
    """Estimate all three components at all points on common samples."""
    pts = [tuple(p) for p in pts]
    for p in pts:
        if not dom.vertex_in_cells(p):
            raise PointOutsideDomainError(f"vertex {p} touches no in-domain cell")
    layout = _NodeLayout(dom)
    nn = layout.fixed.shape[0]
    adj1 = np.zeros((3, nn), dtype=bool)
    adj2 = np.zeros((3, nn), dtype=bool)
    avoid = np.zeros((3, nn), dtype=bool)
    flags = np.zeros((3, len(pts)), dtype=np.int8)
    for k, name in enumerate("BCD"):
        src1, src2, av, junction = COMPONENTS[name]
        e1 = frozenset(e for a in src1 for e in dom.arc_edges(a))
        e2 = frozenset(e for a in src2 for e in dom.arc_edges(a))
        ea = frozenset(e for a in av for e in dom.arc_edges(a))
        adj1[k] = layout.edge_mask(e1)
        adj2[k] = layout.edge_mask(e2)
        avoid[k] = layout.edge_mask(ea)
        avoid_closure = set()
        for e in ea:
            avoid_closure.update((e.a, e.b))
        jv = dom.marked[junction]
        for i, p in enumerate(pts):
            if p in avoid_closure:
                flags[k, i] = -1
            elif p == jv:
                flags[k, i] = 1
    inc = np.stack([_witness_incidence(dom, p) for p in pts])
    nchunks = min(nchunks, samples)
    per_chunk = kernels.separating_hits(
        layout.indptr,
        layout.indices,
        layout.fixed,
        layout.keys,
        np.uint8(YELLOW),
        adj1,
        adj2,
        avoid,
        inc,
        flags,
        np.uint64(int(stream) & (2**64 - 1)),
        np.uint64(index0),
        samples,
        nchunks,
    )
    hits, blocks = kernels.sum_chunks(per_chunk, nblocks=min(nblocks, nchunks))
    return CcsField(dom, tuple(pts), hits, blocks, samples, stream)


# ---------------------------------------------------------------------------
# the crossing probability, via both routes


@dataclass(frozen=True)
class CrossingResult:
    c_n: float
    stderr: float
    via: str


@dataclass(frozen=True)
class CrossingReadout:
    direct: CrossingResult
    imaginary: CrossingResult
    consistent: bool  # routes agree exactly (sC sample mean is zero)


def crossing_probability(field: CcsField, at) -> CrossingReadout:
    """The crossing probability read off as sD(at) and as -(2/sqrt(3))*Im(sn).

    The imaginary route is evaluated through its algebraic simplification
    -(2/sqrt(3)) * Im(sB + tau*sC + tau^2*sD) = sD - sC, which keeps the two
    routes exactly equal whenever the sC sample mean vanishes.
    """
    i = field.index(at)
    sD = ProbEstimate.from_hits(int(field.hits[2, i]), field.samples)
    sC_mean = field.hits[1, i] / field.samples
    direct = CrossingResult(sD.mean, sD.stderr, "DIRECT")
    imag_value = sD.mean - sC_mean
    bm = field.block_means()[:, :, i]
    diffs = bm[:, 2] - bm[:, 1]
    nb = len(diffs)
    imag_err = float(np.std(diffs, ddof=1) / math.sqrt(nb)) if nb > 1 else sD.stderr
    imaginary = CrossingResult(imag_value, imag_err, "IMAGINARY")
    return CrossingReadout(direct, imaginary, consistent=(sC_mean == 0.0))


# ---------------------------------------------------------------------------
# empirical Hoelder profile


@dataclass
class HolderFit:
    sigma_hat: Optional[float]
    ci: tuple
    n_pairs: int
    psi: float
    degenerate: bool = False


def holder_profile(
    field: CcsField,
    psi: Optional[float] = None,
    min_points: int = 50,
    n_boot: int = 200,
    seed: int = 11,
) -> HolderFit:
    """Regression of log|sn(z)-sn(w)| on log|z-w| over pairs with |z-w| < psi."""
    if len(field.points) < min_points:
        raise InsufficientPairsError(
            f"need a grid of >= {min_points} points, got {len(field.points)}"
        )
    if psi is None:
        from .harris import central_disk

        _, delta = central_disk(field.domain)
        psi = max(0.5 * delta, 3.1 * field.domain.eps)
    xy = field.point_xy()
    sn = field.sn()
    dx = xy[:, None, :] - xy[None, :, :]
    dist = np.hypot(dx[..., 0], dx[..., 1])
    iu = np.triu_indices(len(field.points), k=1)
    d = dist[iu]
    df = np.abs(sn[iu[0]] - sn[iu[1]])
    keep = (d < psi) & (d > 0)
    d, df = d[keep], df[keep]
    nz = df > 0
    if not nz.any() or len(np.unique(d[nz])) < 2:
        return HolderFit(None, (math.nan, math.nan), int(keep.sum()), psi, degenerate=True)
    x = np.log(d[nz])
    y = np.log(df[nz])
    slope, _ = np.polyfit(x, y, 1)
    rng = np.random.default_rng(seed)
    boots = []
    k = len(x)
    for _ in range(n_boot):
        pick = rng.integers(0, k, size=k)
        if len(np.unique(x[pick])) < 2:
            continue
        b, _ = np.polyfit(x[pick], y[pick], 1)
        boots.append(b)
    lo, hi = (np.percentile(boots, [2.5, 97.5]) if boots else (slope, slope))
    return HolderFit(float(slope), (float(lo), float(hi)), k, psi)


def interior_vertex_grid(dom: DiscreteDomain, min_count: int = 50, margin: int = 1) -> list:
    """One vertex per cell at least ``margin`` cells away from the boundary."""
    from .domain import boundary_hop_distance
    from .hexlattice import cell_vertices

    hop = boundary_hop_distance(dom)
    pts = []
    for c, d in zip(dom.cells, hop):
        if d > margin:
            pts.append(cell_vertices(c)[1])
    # dedupe, keep deterministic order
    seen = set()
    out = []
    for p in pts:
        if p not in seen:
            seen.add(p)
            out.append(p)
    if len(out) < min_count:
        raise InsufficientPairsError(f"domain too small for a {min_count}-point grid")
    return out


def export_csv(field: CcsField, path) -> None:
    """CSV with columns (x, y, sB, sB_err, sC, sC_err, sD, sD_err, Re Sn, Im Sn)."""
    m = field.means()
    errs = np.sqrt(m * (1 - m) / field.samples)
    sn = field.sn()
    xy = field.point_xy()
    with open(path, "w", newline="") as f:
        f.write("x,y,sB,sB_err,sC,sC_err,sD,sD_err,Re Sn,Im Sn\r\n")
        for i in range(len(field.points)):
            row = [
                xy[i, 0],
                xy[i, 1],
                m[0, i],
                errs[0, i],
                m[1, i],
                errs[1, i],
                m[2, i],
                errs[2, i],
                sn[i].real,
                sn[i].imag,
            ]
            f.write(",".join(repr(float(v)) for v in row) + "\r\n")
