import math
import random

import pytest

from cardylab.hexlattice import (
    INFINITE,
    HexCell,
    SegmentPath,
    StringPath,
    box_grid,
    cell_center,
    cell_vertices,
    d_inf,
    make_edge,
    neighbors,
    segment_diameter,
    shared_edge,
    vertex_cells,
    vertex_neighbors,
    vertex_xy,
)

SQRT3 = math.sqrt(3.0)


def test_neighbors_axial_convention():
    assert [tuple(c) for c in neighbors(HexCell(0, 0))] == [
        (1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)
    ]


def test_neighbor_symmetry():
    a = HexCell(3, -2)
    for b in neighbors(a):
        assert a in neighbors(b)


def test_adjacent_cells_share_two_neighbors():
    a, b = HexCell(0, 0), HexCell(1, 0)
    assert len(set(neighbors(a)) & set(neighbors(b))) == 2


def test_adjacency_and_regularity_random_cells():
    rng = random.Random(42)
    for _ in range(10_000):
        c = HexCell(rng.randint(-50, 50), rng.randint(-50, 50))
        nbs = neighbors(c)
        assert len(set(nbs)) == 6
        # adjacency in the plane: centers at distance sqrt(3) * eps
        cx, cy = vertex_xy(cell_center(c), 1.0)
        for nb in nbs:
            nx, ny = vertex_xy(cell_center(nb), 1.0)
            assert math.hypot(nx - cx, ny - cy) == pytest.approx(SQRT3)


def test_center_injective():
    seen = {}
    for q in range(-12, 13):
        for r in range(-12, 13):
            c = cell_center(HexCell(q, r))
            assert c not in seen
            seen[c] = (q, r)


def test_vertex_cells_three_incident():
    for v in cell_vertices(HexCell(2, -1)):
        cells = vertex_cells(v)
        assert len(cells) == 3
        for c in cells:
            assert v in cell_vertices(c)


def test_shared_edge_is_symmetric():
    a, b = HexCell(0, 0), HexCell(0, 1)
    assert shared_edge(a, b) == shared_edge(b, a)
    assert shared_edge(a, b) in set(
        make_edge(u, v)
        for u, v in zip(cell_vertices(a), cell_vertices(a)[1:] + cell_vertices(a)[:1])
    )


def test_vertex_neighbors_are_involutive():
    v = cell_vertices(HexCell(0, 0))[1]
    for u in vertex_neighbors(v):
        assert v in vertex_neighbors(u)


# --- d_inf -----------------------------------------------------------------


def test_d_inf_identity():
    assert d_inf(None, HexCell(0, 0), HexCell(0, 0)) == 0


def test_d_inf_unconstrained_equals_linf():
    # brute-force oracle: minimal box side in cell units
    assert d_inf(None, HexCell(0, 0), HexCell(2, 0)) == 2


def test_d_inf_disconnected_is_infinite():
    region = {HexCell(0, 0), HexCell(3, 0)}
    assert d_inf(region, HexCell(0, 0), HexCell(3, 0)) == INFINITE


def test_d_inf_convex_region_matches_unconstrained():
    region = {HexCell(q, r) for q in range(12) for r in range(12)}
    rng = random.Random(3)
    for _ in range(12):
        x = HexCell(rng.randint(0, 11), rng.randint(0, 11))
        y = HexCell(rng.randint(0, 11), rng.randint(0, 11))
        free = d_inf(None, x, y)
        constrained = d_inf(region, x, y)
        assert constrained == free


def test_d_inf_metric_like():
    region = {HexCell(q, r) for q in range(8) for r in range(8)}
    rng = random.Random(9)
    pts = [HexCell(rng.randint(0, 7), rng.randint(0, 7)) for _ in range(6)]
    for x in pts:
        for y in pts:
            dxy = d_inf(region, x, y)
            assert dxy == d_inf(region, y, x)
            for z in pts:
                # triangle inequality up to one cell of discretization slack
                assert d_inf(region, x, z) <= dxy + d_inf(region, y, z) + 1


# --- paths and diameters ----------------------------------------------------


def test_string_path_validation():
    StringPath([HexCell(0, 0), HexCell(1, 0), HexCell(1, 1)])
    with pytest.raises(ValueError):
        StringPath([HexCell(0, 0), HexCell(2, 0)])
    with pytest.raises(ValueError):
        StringPath([HexCell(0, 0), HexCell(1, 0), HexCell(0, 0)])


def test_segment_path_validation():
    vs = cell_vertices(HexCell(0, 0))
    SegmentPath(vs + (vs[0],))  # closed hexagon boundary
    with pytest.raises(ValueError):
        SegmentPath([(0, 0), (5, 5)])


def test_segment_diameter_single_vertical_edge():
    eps = 0.25
    seg = SegmentPath([(1, -1), (1, 1)])  # a vertical lattice edge
    assert segment_diameter(seg, eps) == pytest.approx(eps)


def test_segment_diameter_horizontal_run():
    # tops of k hexagons in a horizontal string
    eps = 1.0
    k = 5
    verts = []
    for q in range(k):
        cx, cy = cell_center(HexCell(q, 0))
        verts += [(cx - 1, cy + 1), (cx, cy + 2)]
    verts.append((cell_center(HexCell(k - 1, 0))[0] + 1, 1))
    seg = SegmentPath(verts)
    d = segment_diameter(seg, eps)
    # direct computation: k tops span exactly k cell widths of sqrt(3) * eps
    assert d == pytest.approx(k * SQRT3 * eps)
    assert k * eps <= d <= 2 * (k + 1) * eps


def test_segment_diameter_closed_hexagon():
    vs = cell_vertices(HexCell(0, 0))
    seg = SegmentPath(vs + (vs[0],))
    assert segment_diameter(seg, 0.5) == pytest.approx(1.0)  # 2 * eps


def test_segment_diameter_empty_errors():
    with pytest.raises(ValueError):
        segment_diameter(None, 1.0)


# --- box grids ---------------------------------------------------------------


def test_box_grid_single_box_covers():
    boxes = box_grid((0, 0), 4.0, (0, 0, 4, 4), [HexCell(1, 1)], eps=0.5)
    assert len(boxes) == 1
    assert HexCell(1, 1) in boxes[0].cells


def test_box_grid_even_split():
    boxes = box_grid((0, 0), 2.0, (0, 0, 4, 4))
    assert len(boxes) == 4


def test_box_grid_straddling_hexagon_in_both():
    eps = 1.0
    c = HexCell(0, 0)  # center at the origin, spans x in [-sqrt3/2, sqrt3/2]
    boxes = box_grid((0, 0), 3.0, (-3, -3, 3, 3), [c], eps=eps)
    holders = [b for b in boxes if c in b.cells]
    assert len(holders) == 4  # straddles both axes through the origin
