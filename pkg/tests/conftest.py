import pytest

from cardylab.domain import DiscreteDomain, domain_from_cells, lattice_block_domain
from cardylab.hexlattice import HexCell, cell_center


def _corner(c, dx, dy):
    cx, cy = cell_center(HexCell(*c))
    return (cx + dx, cy + dy)


def block(ncols, nrows, n=None):
    return lattice_block_domain(ncols, nrows, n or max(ncols, nrows))


def mini_fjord():
    """19-cell chamber with a 1-cell-wide channel; A at the channel end."""
    cells = [HexCell(q, r) for q in range(5) for r in range(3)]
    cells += [HexCell(0, 3), HexCell(-1, 4), HexCell(-1, 5), HexCell(-2, 6)]
    dom = DiscreteDomain(cells, n=6)
    a = _corner((-2, 6), 0, 2)  # top of the channel
    b = _corner((0, 0), -1, -1)
    c = _corner((4, 0), 1, -1)
    d = _corner((4, 2), 1, 1)
    return domain_from_cells(cells, 6, (a, b, c, d))


def l_shape():
    cells = [HexCell(q, r) for q in range(4) for r in range(2)]
    cells += [HexCell(0, 2), HexCell(1, 2), HexCell(0, 3), HexCell(1, 3)]
    a = _corner((0, 0), -1, -1)
    b = _corner((3, 0), 1, -1)
    c = _corner((3, 1), 1, 1)
    d = _corner((0, 3), -1, 1)
    return domain_from_cells(cells, 4, (a, b, c, d))


def t_shape():
    cells = [HexCell(q, 0) for q in range(5)]
    cells += [HexCell(2, 1), HexCell(1, 2), HexCell(1, 3)]
    a = _corner((0, 0), -1, -1)
    b = _corner((4, 0), 1, -1)
    c = _corner((4, 0), 1, 1)
    d = _corner((1, 3), -1, 1)
    return domain_from_cells(cells, 4, (a, b, c, d))


def hex_flower():
    center = HexCell(1, 1)
    from cardylab.hexlattice import neighbors

    cells = [center] + list(neighbors(center))
    a = _corner((1, 0), 0, -2)
    b = _corner((2, 0), 1, -1)
    c = _corner((1, 2), 0, 2)
    d = _corner((0, 1), -1, -1)
    return domain_from_cells(cells, 3, (a, b, c, d))


def annulus():
    """Ring of cells around one removed hexagon (for circuit queries)."""
    center = HexCell(1, 1)
    from cardylab.hexlattice import neighbors

    ring = list(neighbors(center))
    ring2 = []
    for c in ring:
        for nb in neighbors(c):
            if nb != center and nb not in ring and nb not in ring2:
                ring2.append(nb)
    cells = ring + ring2
    a = _corner((1, -1), 0, -2)
    b = _corner((3, -1), 1, -1)
    c = _corner((1, 3), 0, 2)
    d = _corner((-1, 1), -1, 1)
    return domain_from_cells(cells, 4, (a, b, c, d), allow_holes=True)


def strip(length=7):
    return block(length, 1, n=length)


FIXTURES = {
    "rhombus2": lambda: block(2, 2),
    "rhombus3": lambda: block(3, 3),
    "rhombus4": lambda: block(4, 4),
    "rect2x3": lambda: block(2, 3),
    "rect3x2": lambda: block(3, 2),
    "rect4x5": lambda: block(4, 5),
    "strip7": lambda: strip(7),
    "l_shape": l_shape,
    "t_shape": t_shape,
    "hex_flower": hex_flower,
    "mini_fjord": mini_fjord,
    "annulus": annulus,
}


@pytest.fixture(scope="session")
def fixture_domains():
    return {name: make() for name, make in FIXTURES.items()}
