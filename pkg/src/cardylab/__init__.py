"""cardylab: a critical-percolation laboratory on hexagonal lattices.

Crossing observables, discrete complex analysis (contour integrals, the
Cauchy-integral extension), Harris systems of separating segments, and the
convergence-rate harness tying them together.
"""

__version__ = "0.1.0"

from .domain import (  # noqa: F401
    ContinuumDomain,
    DiscreteDomain,
    builtin_domains,
    canonical_approximation,
    lattice_block_domain,
    make_domain,
    minkowski_estimate,
    square_regularize,
)
from .hexlattice import (  # noqa: F401
    HexCell,
    LatticeEdge,
    SegmentPath,
    StringPath,
    box_grid,
    d_inf,
    neighbors,
    segment_diameter,
)
from .percolation import (  # noqa: F401
    BLUE,
    YELLOW,
    Coloring,
    CrossingQuery,
    ProbEstimate,
    arc_query,
    brute_force,
    circuit_query,
    estimate,
    has_crossing,
    sample_coloring,
    separating_query,
)
