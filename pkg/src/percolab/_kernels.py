"""Numba kernels for sampling and enumeration.

All randomness reproduces ``_hash`` exactly on uint64: coordinates enter
as bit-reinterpreted (two's complement) uint64 arrays and every open/close
decision is ``(mix64(edge_hash ^ stream_seed) >> 11) * 2^-53 < prob`` with
the same expression on the Python side.  Kernels release the GIL so the
estimator can run them from a thread pool; results are integer counts, so
any partition of the sample range gives bit-identical totals.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
GOLDEN = U64(0x9E3779B97F4A7C15)
TAG_EDGE = U64(0x45444745)
TAG_SITE = U64(0x53495445)
TAG_SAMPLE = U64(0x53414D50)
_INV53 = 2.0**-53


@njit(cache=True, nogil=True, inline="always")
def _mix64(h):
    h = U64(h)
    h ^= h >> U64(30)
    h *= U64(0xBF58476D1CE4E5B9)
    h ^= h >> U64(27)
    h *= U64(0x94D049BB133111EB)
    h ^= h >> U64(31)
    return h


@njit(cache=True, nogil=True, inline="always")
def _absorb(h, v):
    return _mix64(U64(h) ^ _mix64(U64(v) + GOLDEN))


@njit(cache=True, nogil=True)
def hash_rows(tag, rows):
    """Hash each row of a uint64 matrix under a domain tag."""
    n = rows.shape[0]
    out = np.empty(n, dtype=np.uint64)
    for i in range(n):
        h = _absorb(U64(0), tag)
        for j in range(rows.shape[1]):
            h = _absorb(h, rows[i, j])
        out[i] = h
    return out


@njit(cache=True, nogil=True, inline="always")
def _sample_stream(run_seed, index):
    return _absorb(_absorb(_absorb(U64(0), TAG_SAMPLE), run_seed), U64(index))


@njit(cache=True, nogil=True, inline="always")
def _edge_open(ehash, oseed, kind, p, eps, s1, s2):
    u = (_mix64(ehash ^ oseed) >> U64(11)) * _INV53
    if kind == 0:
        return u < p
    return u < p * (1.0 + eps * s1 * s2)


@njit(cache=True, nogil=True, inline="always")
def _site_sign(vhash, oseed):
    if (_mix64(vhash ^ oseed) >> U64(63)) == U64(0):
        return 1.0
    return -1.0


@njit(cache=True, nogil=True)
def mc_count(
    i0,
    i1,
    run_seed,
    indptr,
    nbrs,
    eidx,
    ehash,
    vhash,
    kind,
    p,
    eps,
    sources,
    is_tgt,
    is_wb,
):
    """Evaluate samples [i0, i1); return (connected, undecided-truncated)."""
    nv = indptr.shape[0] - 1
    visited = np.zeros(nv, dtype=np.uint8)
    stack = np.empty(nv, dtype=np.int64)
    succ = 0
    trunc = 0
    for i in range(i0, i1):
        oseed = _sample_stream(run_seed, i)
        connected = False
        touched = False
        tail = 0
        for k in range(sources.shape[0]):
            v = sources[k]
            if visited[v] == 0:
                visited[v] = 1
                stack[tail] = v
                tail += 1
                if is_tgt[v] == 1:
                    connected = True
                if is_wb[v] == 1:
                    touched = True
        head = 0
        while head < tail and not connected:
            v = stack[head]
            head += 1
            s1 = _site_sign(vhash[v], oseed) if kind == 1 else 1.0
            for k in range(indptr[v], indptr[v + 1]):
                u = nbrs[k]
                if visited[u] == 1:
                    continue
                s2 = _site_sign(vhash[u], oseed) if kind == 1 else 1.0
                if not _edge_open(ehash[eidx[k]], oseed, kind, p, eps, s1, s2):
                    continue
                visited[u] = 1
                stack[tail] = u
                tail += 1
                if is_tgt[u] == 1:
                    connected = True
                    break
                if is_wb[u] == 1:
                    touched = True
        for k in range(tail):
            visited[stack[k]] = 0
        if connected:
            succ += 1
        elif touched:
            trunc += 1
    return succ, trunc


@njit(cache=True, nogil=True)
def mc_indicators(
    i0,
    i1,
    run_seed,
    indptr,
    nbrs,
    eidx,
    ehash,
    vhash,
    kind,
    p,
    eps,
    sources,
    is_tgt,
    is_wb,
    out_conn,
    out_trunc,
):
    """Per-sample indicator variant of mc_count (fills uint8 arrays)."""
    nv = indptr.shape[0] - 1
    visited = np.zeros(nv, dtype=np.uint8)
    stack = np.empty(nv, dtype=np.int64)
    for i in range(i0, i1):
        oseed = _sample_stream(run_seed, i)
        connected = False
        touched = False
        tail = 0
        for k in range(sources.shape[0]):
            v = sources[k]
            if visited[v] == 0:
                visited[v] = 1
                stack[tail] = v
                tail += 1
                if is_tgt[v] == 1:
                    connected = True
                if is_wb[v] == 1:
                    touched = True
        head = 0
        while head < tail and not connected:
            v = stack[head]
            head += 1
            s1 = _site_sign(vhash[v], oseed) if kind == 1 else 1.0
            for k in range(indptr[v], indptr[v + 1]):
                u = nbrs[k]
                if visited[u] == 1:
                    continue
                s2 = _site_sign(vhash[u], oseed) if kind == 1 else 1.0
                if not _edge_open(ehash[eidx[k]], oseed, kind, p, eps, s1, s2):
                    continue
                visited[u] = 1
                stack[tail] = u
                tail += 1
                if is_tgt[u] == 1:
                    connected = True
                    break
                if is_wb[u] == 1:
                    touched = True
        for k in range(tail):
            visited[stack[k]] = 0
        out_conn[i - i0] = 1 if connected else 0
        out_trunc[i - i0] = 1 if (touched and not connected) else 0


@njit(cache=True, nogil=True)
def _indicator_for_masks(indptr, nbrs, eidx, sources, is_tgt, n_edges):
    """Event indicator for every edge configuration (2^n_edges masks)."""
    nv = indptr.shape[0] - 1
    nmask = 1 << n_edges
    out = np.empty(nmask, dtype=np.uint8)
    visited = np.zeros(nv, dtype=np.uint8)
    stack = np.empty(nv, dtype=np.int64)
    for mask in range(nmask):
        connected = False
        tail = 0
        for k in range(sources.shape[0]):
            v = sources[k]
            if visited[v] == 0:
                visited[v] = 1
                stack[tail] = v
                tail += 1
                if is_tgt[v] == 1:
                    connected = True
        head = 0
        while head < tail and not connected:
            v = stack[head]
            head += 1
            for k in range(indptr[v], indptr[v + 1]):
                u = nbrs[k]
                if visited[u] == 1:
                    continue
                if (mask >> eidx[k]) & 1 == 0:
                    continue
                visited[u] = 1
                stack[tail] = u
                tail += 1
                if is_tgt[u] == 1:
                    connected = True
                    break
        for k in range(tail):
            visited[stack[k]] = 0
        out[mask] = 1 if connected else 0
    return out


@njit(cache=True, nogil=True)
def exact_sum(
    indptr,
    nbrs,
    eidx,
    sources,
    is_tgt,
    n_edges,
    esrc_site,
    edst_site,
    n_sites,
    kind,
    p,
    eps,
):
    """Exact event probability by enumeration over edges (and site signs)."""
    ind = _indicator_for_masks(indptr, nbrs, eidx, sources, is_tgt, n_edges)
    nmask = 1 << n_edges
    if kind == 0:
        pw_open = np.empty(n_edges + 1)
        pw_closed = np.empty(n_edges + 1)
        pw_open[0] = 1.0
        pw_closed[0] = 1.0
        for k in range(n_edges):
            pw_open[k + 1] = pw_open[k] * p
            pw_closed[k + 1] = pw_closed[k] * (1.0 - p)
        total = 0.0
        for mask in range(nmask):
            if ind[mask] == 0:
                continue
            pop = 0
            mm = mask
            while mm:
                pop += mm & 1
                mm >>= 1
            total += pw_open[pop] * pw_closed[n_edges - pop]
        return total
    total = 0.0
    probs = np.empty(n_edges)
    nsign = 1 << n_sites
    for smask in range(nsign):
        for e in range(n_edges):
            s1 = 1.0 if (smask >> esrc_site[e]) & 1 == 0 else -1.0
            s2 = 1.0 if (smask >> edst_site[e]) & 1 == 0 else -1.0
            probs[e] = p * (1.0 + eps * s1 * s2)
        for mask in range(nmask):
            if ind[mask] == 0:
                continue
            w = 1.0
            for e in range(n_edges):
                if (mask >> e) & 1:
                    w *= probs[e]
                else:
                    w *= 1.0 - probs[e]
            total += w
    return total / nsign
