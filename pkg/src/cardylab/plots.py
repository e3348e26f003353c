"""Matplotlib figure renderers for the report paths.

Figures are written alongside the delimited output of each command; they are
presentation artifacts, so nothing downstream parses them.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import PolyCollection

from .hexlattice import cell_vertices, vertex_xy

_SAVE = dict(dpi=130, bbox_inches="tight")


def _hex_patches(dom, cells=None):
    polys = []
    for c in cells if cells is not None else dom.cells:
        polys.append([vertex_xy(v, dom.eps) for v in cell_vertices(c)])
    return polys


def render_domain(disc, reg, path) -> str:
    fig, ax = plt.subplots(figsize=(5.2, 5.2))
    ax.add_collection(
        PolyCollection(_hex_patches(disc), facecolor="#dce8f4", edgecolor="#7aa0c0", lw=0.3)
    )
    if reg is not None:
        ax.add_collection(
            PolyCollection(_hex_patches(reg), facecolor="#f4e3c1", edgecolor="#c09a58", lw=0.3)
        )
    for name, v in disc.marked.items():
        x, y = vertex_xy(v, disc.eps)
        ax.plot([x], [y], "o", color="crimson", ms=5)
        ax.annotate(name, (x, y), textcoords="offset points", xytext=(4, 4), fontsize=9)
    ax.set_aspect("equal")
    ax.autoscale_view()
    ax.set_title(f"canonical approximation (n={disc.n}) and square regularization")
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return str(path)


def render_convergence(report, path) -> str:
    pts = report["points"]
    ns = [p["n"] for p in pts]
    errs = [p["abs_error"] for p in pts]
    ses = [p["stderr"] for p in pts]
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.errorbar(ns, errs, yerr=ses, fmt="o", capsize=3, color="#20527a", label="|C_n - C_inf|")
    rate = report.get("rate", {})
    if rate.get("psi_hat") is not None:
        xs = np.linspace(min(ns), max(ns), 64)
        ax.plot(
            xs,
            np.exp(rate["intercept"]) * xs ** (-rate["psi_hat"]),
            "--",
            color="#b0503a",
            label=f"fit, psi = {rate['psi_hat']:.2f}",
        )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("absolute error")
    ax.legend(fontsize=8)
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return str(path)


def render_regularization(report, path) -> str:
    pts = [p for p in report["points"] if "abs_diff" in p]
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    if pts:
        ns = [p["n"] for p in pts]
        ds = [p["abs_diff"] for p in pts]
        es = [p.get("stderr", 0.0) for p in pts]
        ax.errorbar(ns, ds, yerr=es, fmt="s", capsize=3, color="#20527a")
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("|S_n(A_n) - S_n_square(A_n_square)|")
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return str(path)


def render_rho(rep, path) -> str:
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.errorbar(rep.n_values, rep.abs_integrals, yerr=rep.stderrs, fmt="o", capsize=3,
                color="#20527a", label="|contour integral|")
    if rep.rho_hat is not None and rep.verdict == "fit":
        xs = np.linspace(min(rep.n_values), max(rep.n_values), 64)
        scale = rep.abs_integrals[0] * (xs / rep.n_values[0]) ** (-rep.rho_hat)
        ax.plot(xs, scale, "--", color="#b0503a", label=f"rho = {rep.rho_hat:.2f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("|contour integral of S_n|")
    ax.set_title(f"verdict: {rep.verdict}")
    ax.legend(fontsize=8)
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return str(path)


def render_cauchy(report, path) -> str:
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ns = [s["n"] for s in report["scales"]]
    ds = [s["proximity"]["max_abs_diff"] for s in report["scales"]]
    ax.plot(ns, ds, "o-", color="#20527a")
    ax.set_xlabel("n")
    ax.set_ylabel("max |F - S| at depth n^-a5")
    wind = report.get("winding", {})
    ok = wind.get("all_one")
    ax.set_title(f"winding check: {'all 1' if ok else 'violations'}")
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return str(path)


def render_harris(system, path) -> str:
    dom = system.domain
    fig, ax = plt.subplots(figsize=(5.6, 5.6))
    ax.add_collection(
        PolyCollection(_hex_patches(dom), facecolor="#eef2f5", edgecolor="#b5c2cc", lw=0.25)
    )
    cmap = plt.get_cmap("viridis")
    nseg = max(1, len(system.rings))
    for k, ring in enumerate(system.rings):
        for seg, style in ((ring.outer, "-"), (ring.inner, "-")):
            xy = np.array([vertex_xy(v, dom.eps) for v in seg.path.vertices])
            ax.plot(xy[:, 0], xy[:, 1], style, color=cmap(k / nseg), lw=1.3)
    sx, sy = vertex_xy(system.station, dom.eps)
    ax.plot([sx], [sy], "*", color="crimson", ms=12, label="station")
    circ = plt.Circle(system.disk.xy, system.disk.delta, fill=False, color="#555", ls=":")
    ax.add_patch(circ)
    ax.set_aspect("equal")
    ax.autoscale_view()
    ax.set_title(f"Harris system: {len(system.rings)} rings ({system.termination})")
    ax.legend(loc="lower right", fontsize=8)
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return str(path)


def render_fit(rep, path) -> str:
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.errorbar(rep.n_values, rep.errors, yerr=rep.stderrs, fmt="o", capsize=3, color="#20527a")
    if rep.psi_hat is not None:
        xs = np.linspace(min(rep.n_values), max(rep.n_values), 64)
        ax.plot(xs, math.exp(rep.intercept) * xs ** (-rep.psi_hat), "--", color="#b0503a",
                label=f"exponent = {rep.psi_hat:.3f}")
        ax.legend(fontsize=8)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("value")
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return str(path)
