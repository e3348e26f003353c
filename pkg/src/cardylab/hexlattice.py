"""Geometry and combinatorics of the hexagonal lattice at scale 1/n.

Cells are regular hexagons of side (= circumradius) ``eps = 1/n``, oriented so
that each cell has two vertical edges ("pointy-top").  Cells are addressed by
axial coordinates ``(q, r)``; vertices live on an exact integer grid:

    true position of integer vertex (xh, yh)  =  (xh * sqrt(3)/2 * eps,  yh * eps/2)

In these units the center of cell (q, r) is the even-parity point
``(2q + r, 3r)`` and all six corners are integer offsets of it, so cell,
vertex and edge identity are bit-exact and closed contours close exactly.
Floating point enters only through :func:`vertex_xy` / :func:`vertex_z` at
export or measure time.
"""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple, Optional, Sequence

SQRT3 = math.sqrt(3.0)

#: Infinite distance marker returned by :func:`d_inf` for disconnected pairs.
INFINITE = math.inf


class HexCell(NamedTuple):
    """Axial address of one hexagon.  The scale lives on the owning domain."""

    q: int
    r: int


Vertex = tuple  # integer (xh, yh) pair


class LatticeEdge(NamedTuple):
    """Unordered lattice edge, endpoints normalized so that a < b."""

    a: Vertex
    b: Vertex


# Counterclockwise starting from the right neighbor.
NEIGHBOR_OFFSETS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))

# Corner offsets from the cell center, counterclockwise starting at the
# lower-right corner.  Neighbor k (above) shares the edge (corner k, corner k+1).
VERTEX_OFFSETS = ((1, -1), (1, 1), (0, 2), (-1, 1), (-1, -1), (0, -2))


def neighbors(cell: HexCell) -> tuple:
    """The 6 edge-adjacent cells, counterclockwise from the right neighbor."""
    q, r = cell
    return tuple(HexCell(q + dq, r + dr) for dq, dr in NEIGHBOR_OFFSETS)


def cell_center(cell: HexCell) -> Vertex:
    """Integer-grid coordinates of the cell center."""
    q, r = cell
    return (2 * q + r, 3 * r)


def cell_vertices(cell: HexCell) -> tuple:
    """The 6 corners, counterclockwise, as integer-grid vertices."""
    cx, cy = cell_center(cell)
    return tuple((cx + dx, cy + dy) for dx, dy in VERTEX_OFFSETS)


def make_edge(u: Vertex, v: Vertex) -> LatticeEdge:
    return LatticeEdge(u, v) if u <= v else LatticeEdge(v, u)


def cell_edges(cell: HexCell) -> tuple:
    """The 6 boundary edges of a cell; edge k faces neighbor k."""
    vs = cell_vertices(cell)
    return tuple(make_edge(vs[k], vs[(k + 1) % 6]) for k in range(6))


def shared_edge(a: HexCell, b: HexCell) -> LatticeEdge:
    """The common edge of two adjacent cells."""
    dq, dr = b.q - a.q, b.r - a.r
    try:
        k = NEIGHBOR_OFFSETS.index((dq, dr))
    except ValueError:
        raise ValueError(f"cells {a} and {b} are not adjacent") from None
    vs = cell_vertices(a)
    return make_edge(vs[k], vs[(k + 1) % 6])


def vertex_cells(v: Vertex) -> tuple:
    """The 3 cells of the infinite lattice incident to a vertex."""
    xh, yh = v
    out = []
    for dx, dy in VERTEX_OFFSETS:
        cy = yh - dy
        if cy % 3:
            continue
        r = cy // 3
        cx = xh - dx
        if (cx - r) % 2:
            continue
        out.append(HexCell((cx - r) // 2, r))
    # every lattice vertex has exactly three incident hexagons
    if len(out) != 3:
        raise ValueError(f"{v} is not a lattice vertex")
    return tuple(out)


def vertex_xy(v: Vertex, eps: float) -> tuple:
    """Macroscopic plane position of an integer-grid vertex."""
    return (v[0] * (SQRT3 / 2.0) * eps, v[1] * 0.5 * eps)


def vertex_z(v: Vertex, eps: float) -> complex:
    x, y = vertex_xy(v, eps)
    return complex(x, y)


def cell_xy(cell: HexCell, eps: float) -> tuple:
    return vertex_xy(cell_center(cell), eps)


def linf(u: Vertex, v: Vertex) -> float:
    """L-infinity distance between two integer-grid points, in cell widths.

    One cell width is the center spacing of horizontally adjacent cells,
    sqrt(3) * eps, i.e. 2 units of xh and 2*sqrt(3) units of yh.
    """
    return max(abs(u[0] - v[0]) / 2.0, abs(u[1] - v[1]) / (2.0 * SQRT3))


def _edge_class(v: Vertex) -> tuple:
    # Honeycomb vertices split in two classes by yh mod 3; each class has a
    # fixed triple of incident edge directions.
    if v[1] % 3 == 1:
        return ((0, -2), (-1, 1), (1, 1))
    if v[1] % 3 == 2:
        return ((0, 2), (1, -1), (-1, -1))
    raise ValueError(f"{v} is not a lattice vertex")


def vertex_neighbors(v: Vertex) -> tuple:
    """The 3 vertices joined to v by a lattice edge."""
    return tuple((v[0] + dx, v[1] + dy) for dx, dy in _edge_class(v))


class StringPath:
    """A string of hexagons: consecutive cells share an edge, no repeats."""

    __slots__ = ("cells",)

    def __init__(self, cells: Sequence[HexCell]):
        cells = tuple(HexCell(*c) for c in cells)
        if len(set(cells)) != len(cells):
            raise ValueError("string repeats a cell")
        for a, b in zip(cells, cells[1:]):
            if (b.q - a.q, b.r - a.r) not in NEIGHBOR_OFFSETS:
                raise ValueError(f"cells {a} and {b} are not adjacent")
        self.cells = cells

    def __len__(self):
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)

    def __repr__(self):
        return f"StringPath({len(self.cells)} cells)"


class SegmentPath:
    """A self-avoiding path of lattice edges, stored as its vertex sequence.

    ``closed`` paths repeat the first vertex at the end.
    """

    __slots__ = ("vertices", "closed")

    def __init__(self, vertices: Sequence[Vertex]):
        vertices = tuple((int(x), int(y)) for x, y in vertices)
        if len(vertices) < 2:
            raise ValueError("a segment needs at least one edge")
        self.closed = vertices[0] == vertices[-1]
        interior = vertices[:-1] if self.closed else vertices
        if len(set(interior)) != len(interior):
            raise ValueError("segment is not self-avoiding")
        for u, v in zip(vertices, vertices[1:]):
            if (v[0] - u[0], v[1] - u[1]) not in _edge_class(u):
                raise ValueError(f"{u} -> {v} is not a lattice edge")
        self.vertices = vertices

    @property
    def edges(self) -> tuple:
        return tuple(make_edge(u, v) for u, v in zip(self.vertices, self.vertices[1:]))

    def edge_set(self) -> frozenset:
        return frozenset(self.edges)

    def __len__(self):
        return len(self.vertices) - 1

    def reversed(self) -> "SegmentPath":
        return SegmentPath(self.vertices[::-1])

    def __repr__(self):
        kind = "closed" if self.closed else "open"
        return f"SegmentPath({len(self)} edges, {kind})"


class EmptySegmentError(ValueError):
    """EMPTY_SEGMENT: diameter of an empty segment is undefined."""


def segment_diameter(seg: SegmentPath, eps: float = 1.0) -> float:
    """L-infinity diameter of the segment's vertex set, macroscopic units."""
    if seg is None or len(seg.vertices) == 0:
        raise EmptySegmentError("empty segment")
    xs = [v[0] for v in seg.vertices]
    ys = [v[1] for v in seg.vertices]
    dx = (max(xs) - min(xs)) * (SQRT3 / 2.0) * eps
    dy = (max(ys) - min(ys)) * 0.5 * eps
    return max(dx, dy)


def diameter_cells(points: Iterable[Vertex]) -> float:
    """L-infinity diameter of a set of integer-grid points, in cell widths."""
    pts = list(points)
    if not pts:
        raise EmptySegmentError("empty point set")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return max((max(xs) - min(xs)) / 2.0, (max(ys) - min(ys)) / (2.0 * SQRT3))


def _box_cells(
    region: Optional[frozenset],
    x0: int,
    y0: int,
    side_xh: int,
    side_yh: int,
    seed: HexCell,
) -> set:
    """Cells of `region` whose center lies in the given integer box, connected to seed."""

    def inside(c: HexCell) -> bool:
        cx, cy = cell_center(c)
        return x0 <= cx <= x0 + side_xh and y0 <= cy <= y0 + side_yh

    if not inside(seed) or (region is not None and seed not in region):
        return set()
    out = {seed}
    stack = [seed]
    while stack:
        c = stack.pop()
        for nb in neighbors(c):
            if nb in out or not inside(nb):
                continue
            if region is not None and nb not in region:
                continue
            out.add(nb)
            stack.append(nb)
    return out


def d_inf(region: Optional[Iterable], x: HexCell, y: HexCell, max_l: int = 256):
    """Box-constrained L-infinity distance between two cells, in cell widths.

    Returns the least integer L such that some axis-aligned box of side L
    (cell widths) contains a string within ``region`` joining x and y, so in
    convex regions this is the plain L-infinity center distance, rounded up.
    Returns INFINITE when no such box exists.  ``region=None`` means the full
    lattice.  Placement of the box is quantized to the half-cell grid, which
    is within the one-cell slack the distance is used with.
    """
    x, y = HexCell(*x), HexCell(*y)
    reg = None if region is None else frozenset(HexCell(*c) for c in region)
    if reg is not None and (x not in reg or y not in reg):
        return INFINITE
    if x == y:
        return 0
    cx, cy = cell_center(x)
    dxh = abs(cx - cell_center(y)[0])
    dyh = abs(cy - cell_center(y)[1])
    l0 = max(1, math.ceil(dxh / 2.0 - 1e-9), math.ceil(dyh / (2.0 * SQRT3) - 1e-9))
    if reg is not None:
        bx = [cell_center(c)[0] for c in reg]
        by = [cell_center(c)[1] for c in reg]
        max_l = min(max_l, 1 + math.ceil(max(max(bx) - min(bx), (max(by) - min(by)) / SQRT3) / 2.0))
    for L in range(l0, max_l + 1):
        side_xh = 2 * L
        side_yh = int(round(2 * SQRT3 * L))
        gx, gy = cell_center(y)
        x_lo, x_hi = max(cx, gx) - side_xh, min(cx, gx)
        y_lo, y_hi = max(cy, gy) - side_yh, min(cy, gy)
        for ax in range(x_lo, x_hi + 1):
            for ay in range(y_lo, y_hi + 1):
                ball = _box_cells(reg, ax, ay, side_xh, side_yh, x)
                if y in ball:
                    return L
    return INFINITE


class Box(NamedTuple):
    """Axis-aligned closed box with the hexagons whose closure meets it."""

    x0: float
    y0: float
    side: float
    cells: tuple


def _hex_box_overlap(cell: HexCell, eps: float, x0: float, y0: float, side: float) -> bool:
    # Separating-axis test between the closed hexagon and the closed box.
    # Box axes: compare bounding intervals; hexagon slanted edge normals:
    # (+-sqrt(3)/2, +-1/2) pairs.
    verts = [vertex_xy(v, eps) for v in cell_vertices(cell)]
    hx = [p[0] for p in verts]
    hy = [p[1] for p in verts]
    if max(hx) < x0 or min(hx) > x0 + side or max(hy) < y0 or min(hy) > y0 + side:
        return False
    corners = ((x0, y0), (x0 + side, y0), (x0 + side, y0 + side), (x0, y0 + side))
    for nx, ny in ((SQRT3 / 2, 0.5), (SQRT3 / 2, -0.5)):
        hproj = [nx * px + ny * py for px, py in verts]
        bproj = [nx * px + ny * py for px, py in corners]
        if max(hproj) < min(bproj) or min(hproj) > max(bproj):
            return False
    return True


def box_grid(
    origin: tuple,
    side: float,
    bounds: tuple,
    cells: Iterable[HexCell] = (),
    eps: float = 1.0,
) -> list:
    """Tile ``bounds = (xmin, ymin, xmax, ymax)`` by closed boxes of ``side``.

    Boxes are anchored at ``origin`` (the grid phase) and cover the bounds;
    each box records which of the given hexagons intersect its closure, so a
    hexagon straddling a box edge is listed in both boxes.
    """
    if side <= 0:
        raise ValueError("box side must be positive")
    xmin, ymin, xmax, ymax = bounds
    ox, oy = origin
    i0 = math.floor((xmin - ox) / side)
    i1 = math.ceil((xmax - ox) / side)
    j0 = math.floor((ymin - oy) / side)
    j1 = math.ceil((ymax - oy) / side)
    cells = list(cells)
    out = []
    for i in range(i0, i1):
        for j in range(j0, j1):
            x0 = ox + i * side
            y0 = oy + j * side
            members = tuple(c for c in cells if _hex_box_overlap(c, eps, x0, y0, side))
            out.append(Box(x0, y0, side, members))
    return out
