import math
from fractions import Fraction

import numpy as np
import pytest

from cardylab.domain import domain_from_cells, lattice_block_domain
from cardylab.hexlattice import HexCell, cell_center, cell_vertices
from cardylab.percolation import (
    BLUE,
    YELLOW,
    Coloring,
    MalformedQueryError,
    TooLargeError,
    arc_query,
    brute_force,
    circuit_query,
    estimate,
    has_crossing,
    sample_coloring,
    separating_query,
)


def test_sampling_deterministic():
    dom = lattice_block_domain(4, 4)
    a = sample_coloring(dom, 7, 123)
    b = sample_coloring(dom, 7, 123)
    assert (a.colors == b.colors).all()


def test_sampling_unbiased():
    dom = lattice_block_domain(3, 3)
    k = dom.cell_id[HexCell(1, 1)]
    n = 100_000
    hits = sum(int(sample_coloring(dom, 5, i).colors[k]) for i in range(0, n, 10))
    m = n // 10
    p = hits / m
    se = math.sqrt(0.25 / m)
    assert abs(p - 0.5) < 5 * se


def test_distinct_indices_differ():
    dom = lattice_block_domain(10, 10)
    base = sample_coloring(dom, 1, 0)
    for i in range(1, 101):
        assert (sample_coloring(dom, 1, i).colors != base.colors).any()


def test_all_yellow_and_all_blue():
    dom = lattice_block_domain(3, 3)
    q = arc_query(dom, "DA", "BC", YELLOW)
    ones = Coloring(dom, np.ones(9, dtype=np.uint8))
    zeros = Coloring(dom, np.zeros(9, dtype=np.uint8))
    assert has_crossing(ones, q)
    assert not has_crossing(zeros, q)


def test_malformed_queries():
    dom = lattice_block_domain(3, 3)
    with pytest.raises(MalformedQueryError):
        separating_query(dom, ("DA",), ("BC",), (), (0, 0))
    from cardylab.percolation import CrossingQuery

    with pytest.raises(MalformedQueryError):
        CrossingQuery("ARC_TO_ARC", YELLOW, frozenset(dom.arc_edges("DA")),
                      frozenset(dom.arc_edges("BC")), witness_point=(0, 0))
    with pytest.raises(MalformedQueryError):
        CrossingQuery("WEIRD", YELLOW, frozenset(), frozenset())


def test_self_duality_exact_small():
    for k in (1, 2, 3, 4):
        dom = lattice_block_domain(k, k)
        p = brute_force(dom, arc_query(dom, "DA", "BC", YELLOW))
        assert p == Fraction(1, 2)


def test_single_cell_half():
    dom = lattice_block_domain(1, 1)
    assert brute_force(dom, arc_query(dom, "DA", "BC", YELLOW)) == Fraction(1, 2)


def test_color_exchange_symmetry():
    dom = lattice_block_domain(2, 3)
    for src, tgt in (("AB", "CD"), ("DA", "BC")):
        py = brute_force(dom, arc_query(dom, src, tgt, YELLOW))
        pb = brute_force(dom, arc_query(dom, src, tgt, BLUE))
        assert py == pb


def test_monotone_in_target_arc():
    dom = lattice_block_domain(3, 3)
    from cardylab.percolation import CrossingQuery

    src = frozenset(dom.arc_edges("AB"))
    small = frozenset(list(dom.arc_edges("CD"))[:3])
    big = frozenset(dom.arc_edges("CD"))
    p_small = brute_force(dom, CrossingQuery("ARC_TO_ARC", YELLOW, src, small))
    p_big = brute_force(dom, CrossingQuery("ARC_TO_ARC", YELLOW, src, big))
    assert p_big >= p_small


def test_brute_force_cap():
    dom = lattice_block_domain(6, 5)  # 30 cells
    with pytest.raises(TooLargeError):
        brute_force(dom, arc_query(dom, "DA", "BC", YELLOW))


def test_2x3_regression_fixture():
    dom = lattice_block_domain(2, 3)
    p = brute_force(dom, arc_query(dom, "AB", "CD", YELLOW))
    assert p == Fraction(21, 64)  # frozen from this enumeration


def test_estimate_matches_oracle():
    dom = lattice_block_domain(2, 3)
    q = arc_query(dom, "AB", "CD", YELLOW)
    exact = float(brute_force(dom, q))
    est = estimate(dom, q, 100_000, stream=42)
    assert abs(est.mean - exact) < 4 * est.stderr


def test_estimate_single_sample():
    dom = lattice_block_domain(2, 2)
    est = estimate(dom, arc_query(dom, "DA", "BC", YELLOW), 1, stream=4)
    assert est.mean in (0.0, 1.0)


def test_rhombus_mc_half():
    dom = lattice_block_domain(8, 8)
    est = estimate(dom, arc_query(dom, "DA", "BC", YELLOW), 100_000, stream=17)
    assert abs(est.mean - 0.5) < 4 * est.stderr


def test_worker_count_independence():
    import numba

    dom = lattice_block_domain(8, 8)
    q = arc_query(dom, "DA", "BC", YELLOW)
    est1 = estimate(dom, q, 20_000, stream=3)
    old = numba.get_num_threads()
    try:
        numba.set_num_threads(1)
        est2 = estimate(dom, q, 20_000, stream=3)
    finally:
        numba.set_num_threads(old)
    assert est1.hits == est2.hits


def test_separating_path_brute_force_agreement(fixture_domains):
    # MC vs exact for the separating event on the 3x3 rhombus center
    dom = fixture_domains["rhombus3"]
    w = cell_vertices(HexCell(1, 1))[1]
    q = separating_query(dom, ("CD",), ("DA", "AB"), ("BC",), w, YELLOW)
    exact = float(brute_force(dom, q))
    est = estimate(dom, q, 100_000, stream=5)
    assert abs(est.mean - exact) < 4 * max(est.stderr, 1e-4)


def test_circuit_query_annulus(fixture_domains):
    dom = fixture_domains["annulus"]
    q = circuit_query(dom, YELLOW, hole=1)
    exact = brute_force(dom, q)
    est = estimate(dom, q, 50_000, stream=6)
    assert abs(est.mean - float(exact)) < 4 * max(est.stderr, 1e-4)


def test_circuit_oracle_small_ring():
    # 6-cell ring around a hole: a circuit needs the whole ring yellow
    from cardylab.domain import DiscreteDomain, MARK_NAMES
    from cardylab.hexlattice import neighbors

    center = HexCell(1, 1)
    ring = list(neighbors(center))
    dom = DiscreteDomain(ring, 3, allow_holes=True)
    walk = dom.walk[:-1]
    marks = dict(zip(MARK_NAMES, (walk[0], walk[4], walk[8], walk[12])))
    dom = DiscreteDomain(ring, 3, marked=marks, allow_holes=True)
    q = circuit_query(dom, YELLOW, hole=1)
    assert brute_force(dom, q) == Fraction(1, 64)


def test_forced_arc_bridges():
    # two竹 cells touching a common forced-yellow arc but not each other
    dom = lattice_block_domain(3, 1)
    from cardylab.percolation import CrossingQuery

    left = frozenset(dom.arc_edges("DA"))
    right = frozenset(dom.arc_edges("BC"))
    top = "CD"
    q = CrossingQuery("ARC_TO_ARC", YELLOW, left, right)
    p_plain = brute_force(dom, q)
    p_forced = brute_force(dom, q, boundary_colors={top: YELLOW})
    # the forced arc lets the crossing skip the middle cell
    assert p_forced > p_plain
    assert p_forced == Fraction(1, 4)


def test_rsw_band():
    # hard-way crossing of a 3:1 lattice rectangle stays in a fixed band
    for n in (8, 16, 32):
        k = max(2, n // 8)
        dom = lattice_block_domain(3 * k, k, n=n)
        q = arc_query(dom, "DA", "BC", YELLOW)  # across the long direction
        est = estimate(dom, q, 40_000, stream=100 + n)
        assert 0.01 <= est.mean <= 0.45


def test_mc_vs_reference_implementation():
    # the numba kernel and the pure-python evaluator agree sample by sample
    dom = lattice_block_domain(3, 3)
    q = arc_query(dom, "AB", "CD", YELLOW)
    hits_py = sum(
        has_crossing(sample_coloring(dom, 11, i), q) for i in range(500)
    )
    est = estimate(dom, q, 500, stream=11)
    assert est.hits == hits_py
