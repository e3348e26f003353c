"""Calibration runs behind the frozen constants in configs/defaults.json.

* B: smallest integer aspect whose hard-way lattice-rectangle crossing at
  n = 32 measures below theta^2.
* lambda: monochrome circuit probability in a ratio-2 lattice annulus.
* r: smallest integer with (1 - lambda)^(r-1) < (theta - theta^2)^2,
  clamped to 2^r >= B.

Run `python -m cardylab.calibrate` to reproduce the numbers.
"""

from __future__ import annotations

import math

from .domain import DiscreteDomain, lattice_block_domain
from .hexlattice import HexCell
from .percolation import BLUE, YELLOW, arc_query, circuit_query, estimate


def hard_way_crossing(aspect: int, n: int = 32, samples: int = 40_000, stream: int = 99):
    """Crossing probability across the long direction of an aspect x 1 block."""
    dom = lattice_block_domain(aspect * n // 8, n // 8, n=n)
    q = arc_query(dom, "DA", "BC", YELLOW)  # between the short sides
    return estimate(dom, q, samples, stream)


def calibrate_B(theta: float = 0.05, n: int = 32, samples: int = 60_000, stream: int = 99):
    """Smallest integer aspect with hard-way crossing below theta^2."""
    target = theta * theta
    results = {}
    for aspect in range(2, 16):
        est = hard_way_crossing(aspect, n=n, samples=samples, stream=stream + aspect)
        results[aspect] = (est.mean, est.stderr)
        if est.mean + 2 * est.stderr < target:
            return aspect, results
    return 16, results


def annulus_circuit_rate(n: int = 32, samples: int = 60_000, stream: int = 7):
    """Monochrome circuit probability in a ratio-2 square lattice annulus."""
    k = n // 2
    cells = [
        HexCell(q, r)
        for q in range(2 * k)
        for r in range(2 * k)
        if not (k // 2 <= q < 3 * k // 2 and k // 2 <= r < 3 * k // 2)
    ]
    dom = DiscreteDomain(cells, n, allow_holes=True)
    q = circuit_query(dom, YELLOW, hole=1)
    return estimate(dom, q, samples, stream)


def calibrate_r(theta: float = 0.05, lam: float = None, B: int = 8, **kw):
    """Smallest r with (1 - lambda)^(r-1) below (theta'')^2, and 2^r >= B."""
    if lam is None:
        lam = annulus_circuit_rate(**kw).mean
    tpp = theta - theta * theta
    r = 1
    while (1.0 - lam) ** (r - 1) >= tpp * tpp and r < 64:
        r += 1
    while 2**r < B:
        r += 1
    return r, lam


def main():
    theta = 0.05
    B, table = calibrate_B(theta)
    print(f"theta = {theta}; hard-way crossings at n=32:")
    for aspect, (m, s) in table.items():
        print(f"  aspect {aspect}: {m:.5f} +- {s:.5f}")
    print(f"B = {B} (first aspect below theta^2 = {theta**2:.4f})")
    lam_est = annulus_circuit_rate()
    r, lam = calibrate_r(theta, lam=lam_est.mean, B=B)
    print(f"lambda (ratio-2 annulus circuit) = {lam_est.mean:.4f} +- {lam_est.stderr:.4f}")
    print(f"r = {r} (smallest with (1-lambda)^(r-1) < theta''^2, 2^r >= B)")


if __name__ == "__main__":
    main()
