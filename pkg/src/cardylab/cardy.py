"""Exact continuum references: the hypergeometric crossing formula for
rectangles, the equilateral reference triangle, and the power-law fitter.

The crossing formula is evaluated from its hypergeometric series

    C(eta) = Gamma(2/3) / (Gamma(1/3) * Gamma(4/3))
             * eta^(1/3) * 2F1(1/3, 2/3; 4/3; eta)

with the reflection C(eta) = 1 - C(1 - eta) used for eta > 1/2, which keeps
the duality identity tight at both ends.  The bridge from a rectangle with
corner marked points to the cross-ratio eta goes through the elliptic
modulus of the rectangle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import ellipk

TAU = complex(-0.5, math.sqrt(3.0) / 2.0)

UNSUPPORTED = "UNSUPPORTED"


class OutOfRangeError(ValueError):
    """OUT_OF_RANGE: the cross-ratio must lie strictly inside (0, 1)."""


class InsufficientPointsError(ValueError):
    """INSUFFICIENT_POINTS: fewer than 3 points above the noise floor."""


@dataclass(frozen=True)
class TriangleT:
    """The equilateral triangle with vertices 1, tau, tau^2 and centroid 0."""

    vertices: tuple = (1.0 + 0.0j, TAU, TAU * TAU)

    def barycentric(self, z: complex) -> tuple:
        v1, v2, v3 = self.vertices
        mat = np.array(
            [
                [v1.real, v2.real, v3.real],
                [v1.imag, v2.imag, v3.imag],
                [1.0, 1.0, 1.0],
            ]
        )
        b = np.linalg.solve(mat, np.array([z.real, z.imag, 1.0]))
        return tuple(float(x) for x in b)

    def contains(self, z: complex, shrink: float = 1.0, tol: float = 1e-12) -> bool:
        """Membership in the closed triangle shrink * T."""
        if shrink <= 0:
            return False
        b = self.barycentric(z / shrink)
        return all(x >= -tol for x in b)

    def boundary_distance(self, z: complex) -> float:
        """Distance from z to the boundary of T (negative means outside)."""
        b = self.barycentric(z)
        # the barycentric coordinates of this triangle equal the scaled
        # distances to the opposite sides; side length is sqrt(3), apothem 1/2
        return min(b) * 1.5


_PREFACTOR = math.gamma(2.0 / 3.0) / (math.gamma(1.0 / 3.0) * math.gamma(4.0 / 3.0))


def _hyp_series(eta: float) -> float:
    """2F1(1/3, 2/3; 4/3; eta) by direct summation, |eta| <= 1/2."""
    term = 1.0
    total = 1.0
    k = 0
    while True:
        ratio = ((1.0 / 3 + k) * (2.0 / 3 + k)) / ((4.0 / 3 + k) * (1.0 + k)) * eta
        term *= ratio
        total += term
        k += 1
        if abs(term) < 1e-16 * abs(total) or k > 500:
            return total


def cardy_rectangle(cross_ratio: float) -> float:
    """Crossing probability of a conformal rectangle at cross-ratio eta."""
    eta = float(cross_ratio)
    if not 0.0 < eta < 1.0:
        raise OutOfRangeError(f"cross ratio {eta} outside (0, 1)")
    if eta > 0.5:
        return 1.0 - cardy_rectangle(1.0 - eta)
    return _PREFACTOR * eta ** (1.0 / 3.0) * _hyp_series(eta)


def rectangle_cross_ratio(aspect: float) -> float:
    """Cross-ratio eta of the crossing measured by the experiments: from the
    (C,D) side to the (A,B) side of a rectangle of the given width/height
    aspect with corner marked points A, B, C, D.

    The rectangle of modulus k has sides 2K(k) and K'(k); the measured
    crossing spans the height, so 2K/K' = 1/aspect, and the corner images
    +-1, +-1/k on the real line give eta = ((1-k)/(1+k))^2.
    """
    if aspect <= 0:
        raise ValueError("aspect must be positive")

    def g(k):
        m = k * k
        return 2.0 * ellipk(m) / ellipk(1.0 - m) - 1.0 / aspect

    k = brentq(g, 1e-15, 1.0 - 1e-15, xtol=1e-15, rtol=8.9e-16)
    return ((1.0 - k) / (1.0 + k)) ** 2


def c_infinity(dom) -> object:
    """Continuum crossing probability for supported generators.

    Rectangles (corner marked points) go through the hypergeometric formula;
    the self-dual rhombus and the square are exactly 1/2.  Anything else
    returns UNSUPPORTED -- there is no general conformal mapper here.
    """
    gen = dict(getattr(dom, "generator", {}) or {})
    name = gen.get("name")
    if name in ("square", "rhombus"):
        return 0.5
    if name == "rectangle":
        return cardy_rectangle(rectangle_cross_ratio(float(gen.get("aspect", 1.0))))
    return UNSUPPORTED


# ---------------------------------------------------------------------------
# power-law fitting


@dataclass
class ExponentFit:
    exponent: float
    ci: tuple
    intercept: float
    n_values: tuple
    used: tuple  # bool per point: above the 3-sigma noise floor
    noise_flags: tuple  # human-readable flag per point


@dataclass
class RateReport:
    n_values: tuple
    errors: tuple
    stderrs: tuple
    psi_hat: Optional[float]
    ci: tuple
    noise_flags: tuple
    intercept: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n_values": list(self.n_values),
            "errors": list(self.errors),
            "stderrs": list(self.stderrs),
            "psi_hat": self.psi_hat,
            "ci": list(self.ci),
            "noise_flags": list(self.noise_flags),
            "intercept": self.intercept,
            "meta": self.meta,
        }


def power_law_fit(
    pairs: Sequence[tuple], n_boot: int = 400, seed: int = 23
) -> ExponentFit:
    """Weighted log-log fit of value ~ c * n^(-exponent) with bootstrap CI.

    Only points whose value exceeds 3x their standard error enter the fit;
    exact inputs (stderr 0) get unit weights.  The bootstrap perturbs each
    usable value by its stderr and refits.
    """
    ns = np.array([float(p[0]) for p in pairs])
    vals = np.array([float(p[1]) for p in pairs])
    errs = np.array([float(p[2]) for p in pairs])
    used = (vals > 3.0 * errs) & (vals > 0)
    flags = tuple(
        "ok" if u else "MC_NOISE_FLOOR" for u in used
    )
    if used.sum() < 3:
        raise InsufficientPointsError(
            f"only {int(used.sum())} of {len(ns)} points above the noise floor"
        )
    x = np.log(ns[used])
    y = np.log(vals[used])
    sigma_log = np.where(errs[used] > 0, errs[used] / vals[used], 0.0)
    w = np.where(sigma_log > 0, 1.0 / np.maximum(sigma_log, 1e-12), 1.0)
    slope, intercept = np.polyfit(x, y, 1, w=w)
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(n_boot):
        v = vals[used] + rng.standard_normal(used.sum()) * errs[used]
        ok = v > 0
        if ok.sum() < 2 or len(np.unique(x[ok])) < 2:
            continue
        b, _ = np.polyfit(x[ok], np.log(v[ok]), 1, w=w[ok])
        boots.append(-b)
    psi = -float(slope)
    lo, hi = (np.percentile(boots, [2.5, 97.5]) if boots else (psi, psi))
    return ExponentFit(
        psi, (float(lo), float(hi)), float(intercept), tuple(ns), tuple(bool(u) for u in used), flags
    )


def rate_report(pairs: Sequence[tuple], meta: Optional[dict] = None) -> RateReport:
    """RateReport wrapper around power_law_fit that degrades gracefully."""
    ns = tuple(int(p[0]) for p in pairs)
    vals = tuple(float(p[1]) for p in pairs)
    errs = tuple(float(p[2]) for p in pairs)
    try:
        fit = power_law_fit(pairs)
        return RateReport(
            ns, vals, errs, fit.exponent, fit.ci, fit.noise_flags, fit.intercept, meta or {}
        )
    except InsufficientPointsError:
        flags = tuple(
            "ok" if (v > 3 * e and v > 0) else "MC_NOISE_FLOOR" for v, e in zip(vals, errs)
        )
        return RateReport(
            ns, vals, errs, None, (math.nan, math.nan), flags, None,
            dict(meta or {}, verdict="MC_NOISE_DOMINATED"),
        )
