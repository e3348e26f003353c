"""Numba kernels for percolation sampling and the exact enumeration oracle.

Coloring bits come from a splitmix64 counter hash of (stream, sample index,
cell key): every cell's color is a pure function of those three integers, so
results are reproducible for any worker count and any partitioning of the
sample range.  Parallel kernels reduce over a fixed chunk grid (independent
of the thread count) and the Python wrappers sum chunks in a fixed order,
which keeps outputs byte-identical across thread settings.

Node arrays may contain virtual nodes (forced-color boundary arcs): entries
of ``fixed`` >= 0 pin the color, -1 means sampled.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)

YELLOW = 1
BLUE = 0

DEFAULT_CHUNKS = 256


@njit(cache=True, inline="always")
def _mix64(z):
    z = z + _GOLDEN
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def color_bit(stream, index, key):
    h = _mix64(_mix64(_mix64(U64(stream)) ^ U64(index)) ^ U64(key))
    return np.uint8(h >> U64(63))


def coloring_bits(stream: int, index: int, keys: np.ndarray) -> np.ndarray:
    """Colors (1=yellow, 0=blue) for the given cell keys; pure and stateless."""
    return _coloring_bits(U64(stream & (2**64 - 1)), U64(index), keys.astype(np.uint64))


@njit(cache=True)
def _coloring_bits(stream, index, keys):
    out = np.empty(keys.shape[0], np.uint8)
    for i in range(keys.shape[0]):
        out[i] = color_bit(stream, index, keys[i])
    return out


@njit(cache=True, inline="always")
def _fill_colors(colors, fixed, keys, stream, idx):
    for v in range(fixed.shape[0]):
        f = fixed[v]
        if f >= 0:
            colors[v] = np.uint8(f)
        else:
            colors[v] = color_bit(stream, idx, keys[v])


@njit(cache=True, inline="always")
def _has_crossing(indptr, indices, colors, src, tgt, want, mark, stack):
    n = colors.shape[0]
    for v in range(n):
        mark[v] = 0
    top = 0
    for v in range(n):
        if src[v] and colors[v] == want:
            if tgt[v]:
                return True
            mark[v] = 1
            stack[top] = v
            top += 1
    while top > 0:
        top -= 1
        v = stack[top]
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            if mark[u] == 0 and colors[u] == want:
                if tgt[u]:
                    return True
                mark[u] = 1
                stack[top] = u
                top += 1
    return False


@njit(cache=True)
def crossing_hits(
    indptr, indices, fixed, keys, src, tgt, want, stream, index0, nsamples, nchunks
):
    """Per-chunk hit counts for a monochrome src->tgt crossing."""
    n = fixed.shape[0]
    per = (nsamples + nchunks - 1) // nchunks
    out = np.zeros(nchunks, np.int64)
    for c in prange(nchunks):
        colors = np.empty(n, np.uint8)
        mark = np.zeros(n, np.uint8)
        stack = np.empty(n, np.int32)
        lo = c * per
        hi = min(nsamples, lo + per)
        hits = 0
        for s in range(lo, hi):
            _fill_colors(colors, fixed, keys, stream, index0 + s)
            if _has_crossing(indptr, indices, colors, src, tgt, want, mark, stack):
                hits += 1
        out[c] = hits
    return out


@njit(cache=True)
def crossing_indicators(
    indptr, indices, fixed, keys, src, tgt, want, stream, index0, nsamples
):
    """Per-sample 0/1 crossing indicators (for joint multi-region events)."""
    n = fixed.shape[0]
    out = np.zeros(nsamples, np.uint8)
    for s in prange(nsamples):
        colors = np.empty(n, np.uint8)
        mark = np.zeros(n, np.uint8)
        stack = np.empty(n, np.int32)
        _fill_colors(colors, fixed, keys, stream, index0 + s)
        if _has_crossing(indptr, indices, colors, src, tgt, want, mark, stack):
            out[s] = 1
    return out


@njit(cache=True, inline="always")
def _mark_blocked(indptr, indices, colors, want, adj1, adj2, blocked, mark, stack, comp):
    """Clusters of the wanted color touching both adj1 and adj2 arcs -> blocked."""
    n = colors.shape[0]
    for v in range(n):
        blocked[v] = 0
        mark[v] = 0
    for v0 in range(n):
        if adj1[v0] and colors[v0] == want and mark[v0] == 0:
            # collect the component of v0
            csize = 0
            touches2 = False
            mark[v0] = 1
            stack[0] = v0
            top = 1
            while top > 0:
                top -= 1
                v = stack[top]
                comp[csize] = v
                csize += 1
                if adj2[v]:
                    touches2 = True
                for k in range(indptr[v], indptr[v + 1]):
                    u = indices[k]
                    if mark[u] == 0 and colors[u] == want:
                        mark[u] = 1
                        stack[top] = u
                        top += 1
            if touches2:
                for i in range(csize):
                    blocked[comp[i]] = 1


@njit(cache=True, inline="always")
def _reach_unblocked(indptr, indices, blocked, seeds, reach, stack):
    n = blocked.shape[0]
    for v in range(n):
        reach[v] = 0
    top = 0
    for v in range(n):
        if seeds[v] and blocked[v] == 0:
            reach[v] = 1
            stack[top] = v
            top += 1
    while top > 0:
        top -= 1
        v = stack[top]
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            if reach[u] == 0 and blocked[u] == 0:
                reach[u] = 1
                stack[top] = u
                top += 1


@njit(cache=True)
def separating_hits(
    indptr,
    indices,
    fixed,
    keys,
    want,  # crossing color whose clusters block
    adj1,  # (ncomp, n) nodes adjacent to the first source arc
    adj2,  # (ncomp, n) nodes adjacent to the second source arc
    avoid,  # (ncomp, n) nodes adjacent to the avoid arc
    inc,  # (npts, 3) incident node ids of each witness vertex, -1 padded
    flags,  # (ncomp, npts) int8: +1 always separated, -1 never, 0 evaluate
    stream,
    index0,
    nsamples,
    nchunks,
):
    """Hit counts of the separating-crossing events, all components and
    witness points evaluated on common samples.

    Returns int64 array of shape (nchunks, ncomp, npts).
    """
    n = fixed.shape[0]
    ncomp = adj1.shape[0]
    npts = inc.shape[0]
    per = (nsamples + nchunks - 1) // nchunks
    out = np.zeros((nchunks, ncomp, npts), np.int64)
    for c in prange(nchunks):
        colors = np.empty(n, np.uint8)
        mark = np.zeros(n, np.uint8)
        blocked = np.zeros(n, np.uint8)
        reach = np.zeros(n, np.uint8)
        stack = np.empty(n, np.int32)
        comp = np.empty(n, np.int32)
        lo = c * per
        hi = min(nsamples, lo + per)
        for s in range(lo, hi):
            _fill_colors(colors, fixed, keys, stream, index0 + s)
            for x in range(ncomp):
                _mark_blocked(
                    indptr, indices, colors, want, adj1[x], adj2[x], blocked, mark, stack, comp
                )
                _reach_unblocked(indptr, indices, blocked, avoid[x], reach, stack)
                for p in range(npts):
                    f = flags[x, p]
                    if f > 0:
                        out[c, x, p] += 1
                    elif f == 0:
                        sep = True
                        for k in range(3):
                            u = inc[p, k]
                            if u >= 0 and blocked[u] == 0 and reach[u] == 1:
                                sep = False
                                break
                        if sep:
                            out[c, x, p] += 1
    return out


# ---------------------------------------------------------------------------
# exact enumeration (the desk-scale oracle)


@njit(cache=True)
def bf_crossing_hits(indptr, indices, fixed, rand_ids, src, tgt, want):
    """Exact count of colorings with a monochrome src->tgt crossing."""
    n = fixed.shape[0]
    m = rand_ids.shape[0]
    colors = np.empty(n, np.uint8)
    for v in range(n):
        colors[v] = np.uint8(fixed[v]) if fixed[v] >= 0 else np.uint8(0)
    mark = np.zeros(n, np.uint8)
    stack = np.empty(n, np.int32)
    hits = np.int64(0)
    total = np.int64(1) << m
    for bits in range(total):
        for i in range(m):
            colors[rand_ids[i]] = np.uint8((bits >> i) & 1)
        if _has_crossing(indptr, indices, colors, src, tgt, want, mark, stack):
            hits += 1
    return hits


@njit(cache=True)
def bf_separating_hits(indptr, indices, fixed, rand_ids, adj1, adj2, avoid, inc, flag, want):
    """Exact count of colorings realizing the separating-crossing event.

    ``want`` selects the crossing color; the blocked-cluster logic runs on
    that color (clusters of color `want` touching both arcs).
    """
    n = fixed.shape[0]
    m = rand_ids.shape[0]
    if flag > 0:
        return np.int64(1) << m
    if flag < 0:
        return np.int64(0)
    colors = np.empty(n, np.uint8)
    for v in range(n):
        colors[v] = np.uint8(fixed[v]) if fixed[v] >= 0 else np.uint8(0)
    mark = np.zeros(n, np.uint8)
    blocked = np.zeros(n, np.uint8)
    reach = np.zeros(n, np.uint8)
    stack = np.empty(n, np.int32)
    comp = np.empty(n, np.int32)
    hits = np.int64(0)
    total = np.int64(1) << m
    for bits in range(total):
        for i in range(m):
            colors[rand_ids[i]] = np.uint8((bits >> i) & 1)
        _mark_blocked(indptr, indices, colors, want, adj1, adj2, blocked, mark, stack, comp)
        _reach_unblocked(indptr, indices, blocked, avoid, reach, stack)
        sep = True
        for k in range(3):
            u = inc[k]
            if u >= 0 and blocked[u] == 0 and reach[u] == 1:
                sep = False
                break
        if sep:
            hits += 1
    return hits


def sum_chunks(per_chunk: np.ndarray, nblocks: int = 0):
    """Deterministic reduction of per-chunk counts; optionally grouped into
    ``nblocks`` consecutive blocks (for batch-means error bars)."""
    total = per_chunk.sum(axis=0)
    if not nblocks:
        return total
    nchunks = per_chunk.shape[0]
    if nblocks > nchunks:
        nblocks = nchunks
    edges = np.linspace(0, nchunks, nblocks + 1).astype(int)
    blocks = np.stack(
        [per_chunk[a:b].sum(axis=0) for a, b in zip(edges[:-1], edges[1:])], axis=0
    )
    return total, blocks
