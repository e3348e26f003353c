"""Discrete complex analysis on lattice fields.

Vertex fields are linearly interpolated along edges, so the contour integral
of a field over a lattice contour is the trapezoid sum
``sum (f(v1)+f(v2))/2 * (v2-v1)`` -- exact for fields that restrict degree-one
polynomials.  The integral accumulates in the exact integer vertex grid (the
irrational sqrt(3)/2 scale factors are applied once at the end), so the
decomposition of a contour integral into enclosed per-hexagon residuals is an
arithmetic identity.

The Cauchy-integral extension of a boundary field integrates the linear
interpolant against the Cauchy kernel in closed form edge by edge (log
antiderivative); a straight edge subtends less than pi from any off-edge
point, so the principal branch of each per-edge log is automatically the
continuous one and constants and degree-one fields reproduce exactly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Optional, Sequence

import numpy as np

from .cardy import TAU, TriangleT, rate_report
from .domain import DiscreteDomain, boundary_hop_distance
from .hexlattice import (
    SQRT3,
    HexCell,
    SegmentPath,
    cell_center,
    cell_vertices,
    make_edge,
    vertex_z,
)

SHRUNKEN = "SHRUNKEN"


class MissingVertexValueError(KeyError):
    """MISSING_VERTEX_VALUE: the field lacks a value on a contour vertex."""


class TooCloseToContourError(ValueError):
    """TOO_CLOSE_TO_CONTOUR: evaluation point within eps/4 of the contour."""


class PointOnCurveError(ValueError):
    """POINT_ON_CURVE: winding number undefined on the curve itself."""


class EmptyShrunkenError(ValueError):
    """EMPTY_SHRUNKEN: no cell maps into the shrunken triangle."""


class LatticeContour:
    """Simple closed lattice contour, normalized to counterclockwise."""

    def __init__(self, vertices: Sequence[tuple]):
        seg = SegmentPath(vertices)
        if not seg.closed:
            raise ValueError("contour must be closed")
        area2 = 0
        vs = seg.vertices
        for (x1, y1), (x2, y2) in zip(vs, vs[1:]):
            area2 += x1 * y2 - x2 * y1
        if area2 == 0:
            raise ValueError("degenerate contour")
        if area2 < 0:
            seg = seg.reversed()
        self.segment = seg

    @property
    def vertices(self) -> tuple:
        return self.segment.vertices

    def length(self, eps: float) -> float:
        # every lattice edge has length eps
        return len(self.segment) * eps

    def __len__(self):
        return len(self.segment)

    def __repr__(self):
        return f"LatticeContour({len(self)} edges)"


def _value(fld, v):
    if callable(fld):
        return fld(v)
    try:
        return fld[v]
    except KeyError:
        raise MissingVertexValueError(f"no field value at vertex {v}") from None


def contour_integral_raw(fld, vertices: Sequence[tuple]):
    """Accumulated (sx, sy) with integral = (eps/4) * (sqrt(3)*sx + i*sy).

    Exact whenever the field values support exact addition/multiplication
    (e.g. Fractions); interior edges of adjoining contours cancel termwise.
    """
    sx = 0
    sy = 0
    for u, v in zip(vertices, vertices[1:]):
        w = _value(fld, u) + _value(fld, v)
        sx = sx + w * (v[0] - u[0])
        sy = sy + w * (v[1] - u[1])
    return sx, sy


def contour_integral(fld, contour, eps: float) -> complex:
    """Trapezoid contour integral of a vertex field along a closed contour."""
    vertices = contour.vertices if isinstance(contour, LatticeContour) else tuple(contour)
    sx, sy = contour_integral_raw(fld, vertices)
    return (eps / 4.0) * (SQRT3 * complex(sx) + 1j * complex(sy))


def hexagon_residual(fld, h: HexCell, eps: float) -> complex:
    """Contour integral around one hexagon (the discrete holomorphicity defect)."""
    vs = cell_vertices(h)
    return contour_integral(fld, vs + (vs[0],), eps)


def enclosed_cells(contour: LatticeContour) -> list:
    """Hexagons strictly inside a simple closed lattice contour.

    Exact integer ray casting: cell centers have y == 0 mod 3 while contour
    vertices never do, so a horizontal ray through a center meets no vertex;
    only vertical contour edges can cross it.
    """
    vs = contour.vertices
    xs = [v[0] for v in vs]
    ys = [v[1] for v in vs]
    verticals = []
    for u, v in zip(vs, vs[1:]):
        if u[0] == v[0]:
            verticals.append((u[0], (u[1] + v[1]) // 2))
    out = []
    for r in range(math.floor(min(ys) / 3), math.floor(max(ys) / 3) + 1):
        cy = 3 * r
        row = sorted(x for x, ymid in verticals if ymid == cy)
        for q in range((min(xs) - r) // 2, (max(xs) - r) // 2 + 1):
            cx = 2 * q + r
            crossings = sum(1 for x in row if x > cx)
            if crossings % 2:
                out.append(HexCell(q, r))
    return out


def residual_decomposition_gap(fld, contour: LatticeContour, eps: float) -> float:
    """|contour integral - sum of enclosed hexagon residuals| (float check)."""
    total = contour_integral(fld, contour, eps)
    inner = sum(hexagon_residual(fld, h, eps) for h in enclosed_cells(contour))
    return abs(total - inner)


@dataclass
class ResidualReport:
    n: int
    per_hexagon: dict
    contour_total: complex
    decomposition_gap: float
    rho_fit: Optional[object] = None


def residual_report(fld, contour: LatticeContour, eps: float) -> ResidualReport:
    per = {h: hexagon_residual(fld, h, eps) for h in enclosed_cells(contour)}
    total = contour_integral(fld, contour, eps)
    gap = abs(total - sum(per.values()))
    return ResidualReport(round(1.0 / eps), per, total, gap)


# ---------------------------------------------------------------------------
# winding numbers


def winding_number(curve: Sequence[complex], w: complex) -> int:
    """Winding of a closed polyline around w, by per-edge argument increments."""
    pts = [complex(z) for z in curve]
    if abs(pts[0] - pts[-1]) > 1e-12:
        pts.append(pts[0])
    scale = max(abs(z - w) for z in pts)
    total = 0.0
    for a, b in zip(pts, pts[1:]):
        ua, ub = a - w, b - w
        if abs(ua) <= 1e-13 * scale or abs(ub) <= 1e-13 * scale:
            raise PointOnCurveError(f"{w} lies on the curve")
        total += cmath.phase(ub / ua)
    k = round(total / (2.0 * math.pi))
    if abs(total - 2.0 * math.pi * k) > 0.01:
        raise PointOnCurveError(f"winding accumulation did not close ({total})")
    return k


# ---------------------------------------------------------------------------
# the Cauchy-integral extension


class CauchyExtension:
    """Closed-form Cauchy integral of a linearly interpolated boundary field."""

    def __init__(self, contour: LatticeContour, values: Dict[tuple, complex], eps: float,
                 domain: Optional[DiscreteDomain] = None):
        self.contour = contour
        self.eps = eps
        self.domain = domain
        vs = contour.vertices
        self.zeta = np.array([vertex_z(v, eps) for v in vs])
        try:
            self.svals = np.array([complex(values[v]) for v in vs])
        except KeyError as e:
            raise MissingVertexValueError(f"no boundary value at {e.args[0]}") from None
        self._dz = self.zeta[1:] - self.zeta[:-1]
        self._beta = (self.svals[1:] - self.svals[:-1]) / self._dz

    def distance(self, z: complex) -> float:
        """Euclidean distance from z to the contour polyline."""
        a = self.zeta[:-1]
        d = self._dz
        t = np.clip(((z - a) * np.conj(d)).real / np.abs(d) ** 2, 0.0, 1.0)
        return float(np.min(np.abs(a + t * d - z)))

    def evaluate(self, z: complex, check: bool = True) -> complex:
        if check and self.distance(z) < self.eps / 4.0:
            raise TooCloseToContourError(f"{z} is within eps/4 of the contour")
        u1 = self.zeta[:-1] - z
        u2 = self.zeta[1:] - z
        alpha = self.svals[:-1] - self._beta * u1
        logs = np.log(u2 / u1)  # principal branch: |darg| < pi per straight edge
        total = np.sum(alpha * logs) + np.sum(self._beta * (u2 - u1))
        return complex(total / (2j * math.pi))

    def evaluate_many(self, zs: Iterable[complex], check: bool = True) -> np.ndarray:
        return np.array([self.evaluate(z, check=check) for z in zs])


def boundary_contour(dom: DiscreteDomain) -> LatticeContour:
    return LatticeContour(dom.walk)


def cauchy_extension_from_field(ccs_field) -> CauchyExtension:
    """Extension of an estimated complex field given on the boundary walk."""
    dom = ccs_field.domain
    sn = ccs_field.sn()
    values = {p: sn[i] for i, p in enumerate(ccs_field.points)}
    return CauchyExtension(boundary_contour(dom), values, dom.eps, domain=dom)


def interior_offset_contour(dom: DiscreteDomain, depth_cells: int) -> LatticeContour:
    """Outer boundary of the cells at hop distance >= depth from the boundary."""
    hop = boundary_hop_distance(dom)
    keep = [c for c, d in zip(dom.cells, hop) if d >= depth_cells]
    if not keep:
        raise EmptyShrunkenError(f"no cells at depth {depth_cells}")
    from .domain import _boundary_walks, _components

    comps = _components(keep)
    comps.sort(key=lambda comp: (-len(comp), min(comp)))
    walk = _boundary_walks(sorted(comps[0]))[0]
    return LatticeContour(walk)


# ---------------------------------------------------------------------------
# the shrunken domain


@dataclass
class ShrunkenDomain:
    base: DiscreteDomain
    a4: float
    shrink: float
    member_cells: tuple
    marked: dict  # B, C, D -> HexCell
    values: dict  # cell -> F(center)

    @property
    def kind(self) -> str:
        return SHRUNKEN

    def boundary_member_cells(self) -> list:
        """Members with at least one non-member neighbor (inside the base)."""
        from .hexlattice import neighbors

        ms = set(self.member_cells)
        out = []
        for c in self.member_cells:
            for nb in neighbors(c):
                if nb in self.base.cell_id and nb not in ms:
                    out.append(c)
                    break
        return out


def extract_shrunken(ext: CauchyExtension, base: DiscreteDomain, a4: float) -> ShrunkenDomain:
    """Preimage of the shrunken triangle under the Cauchy extension."""
    if a4 <= 0:
        raise ValueError("a4 must be positive")
    shrink = 1.0 - base.n ** (-a4)
    tri = TriangleT()
    values = {}
    members = []
    for c in base.cells:
        z = vertex_z(cell_center(c), base.eps)
        if ext.distance(z) < base.eps / 4.0:
            continue
        f = ext.evaluate(z, check=False)
        values[c] = f
        if tri.contains(f, shrink=shrink):
            members.append(c)
    if not members:
        raise EmptyShrunkenError(f"no cell center maps into {shrink:.4f} * T")
    marked = {}
    for name, v in zip("BCD", (1.0 + 0j, TAU, TAU * TAU)):
        target = shrink * v
        marked[name] = min(members, key=lambda c: (abs(values[c] - target), c))
    return ShrunkenDomain(base, a4, shrink, tuple(members), marked, values)


# ---------------------------------------------------------------------------
# the sigma-holomorphicity decay experiment


@dataclass
class RhoReport:
    n_values: tuple
    integrals: tuple
    abs_integrals: tuple
    stderrs: tuple
    lengths: tuple
    rho_hat: Optional[float]
    ci: tuple
    verdict: str  # "fit", "MC_NOISE_DOMINATED" or "DEGENERATE"
    noise_flags: tuple

    def to_dict(self) -> dict:
        return {
            "n_values": list(self.n_values),
            "integrals": [[z.real, z.imag] for z in self.integrals],
            "abs_integrals": list(self.abs_integrals),
            "stderrs": list(self.stderrs),
            "contour_lengths": list(self.lengths),
            "rho_hat": self.rho_hat,
            "ci": list(self.ci),
            "verdict": self.verdict,
            "noise_flags": list(self.noise_flags),
        }


def snap_square_contour(dom: DiscreteDomain, center: tuple, half_side: float) -> LatticeContour:
    """Lattice-snapped boundary of a macroscopic axis-aligned square."""
    from .domain import _boundary_walks, _components
    from .hexlattice import cell_xy

    keep = []
    for c in dom.cells:
        x, y = cell_xy(c, dom.eps)
        if abs(x - center[0]) <= half_side and abs(y - center[1]) <= half_side:
            keep.append(c)
    if not keep:
        raise ValueError("snap square contains no cells")
    comps = _components(keep)
    comps.sort(key=lambda comp: (-len(comp), min(comp)))
    walk = _boundary_walks(sorted(comps[0]))[0]
    return LatticeContour(walk)


def rho_fit(
    dom_gen,
    n_ladder: Sequence[int],
    samples: int,
    stream: int,
    contour_center: Optional[tuple] = None,
    contour_half_side: Optional[float] = None,
    field_fn: Optional[Callable] = None,
    nblocks: int = 16,
) -> RhoReport:
    """Decay of |contour integral of the complex field| along an n-ladder.

    With ``field_fn`` given, integrates the synthetic field instead of a
    Monte Carlo estimate (no error bars).  The contour is the lattice snap of
    one fixed macroscopic square per n.
    """
    from .ccs import estimate_ccs
    from .domain import canonical_approximation

    if len(n_ladder) < 2 and field_fn is None:
        raise ValueError("need an n ladder")
    if contour_center is None or contour_half_side is None:
        xmin, ymin, xmax, ymax = dom_gen.bbox
        contour_center = ((xmin + xmax) / 2.0, (ymin + ymax) / 2.0)
        contour_half_side = 0.2 * min(xmax - xmin, ymax - ymin)
    ints, errs, lens = [], [], []
    for i, n in enumerate(n_ladder):
        disc = canonical_approximation(dom_gen, n)
        contour = snap_square_contour(disc, contour_center, contour_half_side)
        if field_fn is not None:
            vals = {v: field_fn(vertex_z(v, disc.eps)) for v in contour.vertices}
            I = contour_integral(vals, contour, disc.eps)
            ints.append(I)
            errs.append(0.0)
        else:
            pts = list(dict.fromkeys(contour.vertices))
            fld = estimate_ccs(disc, pts, samples, stream, index0=i * samples, nblocks=nblocks)
            sn = fld.sn()
            vals = {p: sn[k] for k, p in enumerate(pts)}
            I = contour_integral(vals, contour, disc.eps)
            bm = fld.block_means()  # (nb, 3, P)
            nb = bm.shape[0]
            block_ints = []
            for b in range(nb):
                snb = bm[b, 0] + TAU * bm[b, 1] + TAU * TAU * bm[b, 2]
                vb = {p: snb[k] for k, p in enumerate(pts)}
                block_ints.append(contour_integral(vb, contour, disc.eps))
            block_ints = np.array(block_ints)
            var = np.sum(np.abs(block_ints - block_ints.mean()) ** 2) / (nb - 1)
            errs.append(float(math.sqrt(var / nb)))
            ints.append(I)
        lens.append(contour.length(disc.eps))
    abs_ints = [abs(I) for I in ints]
    if max(abs_ints) < 1e-13:
        return RhoReport(
            tuple(n_ladder), tuple(ints), tuple(abs_ints), tuple(errs), tuple(lens),
            None, (math.nan, math.nan), "DEGENERATE", ("zero",) * len(ints),
        )
    noise_dominated = abs_ints[-1] < 3.0 * errs[-1]
    rep = rate_report(list(zip(n_ladder, abs_ints, errs)))
    verdict = "MC_NOISE_DOMINATED" if noise_dominated else (
        "fit" if rep.psi_hat is not None else "MC_NOISE_DOMINATED"
    )
    return RhoReport(
        tuple(n_ladder), tuple(ints), tuple(abs_ints), tuple(errs), tuple(lens),
        rep.psi_hat, rep.ci, verdict, rep.noise_flags,
    )
