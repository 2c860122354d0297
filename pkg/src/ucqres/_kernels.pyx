# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled search kernels. Semantics mirror ``_fallback`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.stdint cimport uint8_t, int32_t, int64_t, uint64_t

cnp.import_array()


cdef struct HomState:
    int n_src
    int n_tgt
    int n_edges
    const int32_t* esym
    const int32_t* eu
    const int32_t* ev
    const uint8_t* adj      # (S, n_tgt, n_tgt) flattened
    uint8_t* dom            # (n_src, n_tgt) flattened, mutated
    int32_t* dsize          # remaining values per source variable
    int32_t* inc_ptr        # CSR over incident edges
    int32_t* inc_idx
    int32_t* trail          # removed (var * n_tgt + val)
    int trail_top
    int32_t* assign


cdef inline bint _adj(HomState* st, int s, int a, int b) nogil:
    return st.adj[(<int64_t>s * st.n_tgt + a) * st.n_tgt + b] != 0


cdef inline void _remove(HomState* st, int var, int val) nogil:
    st.dom[var * st.n_tgt + val] = 0
    st.dsize[var] -= 1
    st.trail[st.trail_top] = var * st.n_tgt + val
    st.trail_top += 1


cdef void _undo(HomState* st, int mark) nogil:
    cdef int code
    while st.trail_top > mark:
        st.trail_top -= 1
        code = st.trail[st.trail_top]
        st.dom[code] = 1
        st.dsize[code // st.n_tgt] += 1


cdef bint _arc_consistency(HomState* st) nogil:
    # plain AC-3 style fixpoint, one sweep over all edges per round
    cdef bint changed = True
    cdef int e, s, u, v, a, b, nt = st.n_tgt
    cdef bint ok
    # unary part: loops
    for e in range(st.n_edges):
        s = st.esym[e]; u = st.eu[e]; v = st.ev[e]
        if u == v:
            for a in range(nt):
                if st.dom[u * nt + a] and not _adj(st, s, a, a):
                    _remove(st, u, a)
            if st.dsize[u] == 0:
                return False
    while changed:
        changed = False
        for e in range(st.n_edges):
            s = st.esym[e]; u = st.eu[e]; v = st.ev[e]
            if u == v:
                continue
            for a in range(nt):
                if not st.dom[u * nt + a]:
                    continue
                ok = False
                for b in range(nt):
                    if st.dom[v * nt + b] and _adj(st, s, a, b):
                        ok = True
                        break
                if not ok:
                    _remove(st, u, a)
                    changed = True
            if st.dsize[u] == 0:
                return False
            for b in range(nt):
                if not st.dom[v * nt + b]:
                    continue
                ok = False
                for a in range(nt):
                    if st.dom[u * nt + a] and _adj(st, s, a, b):
                        ok = True
                        break
                if not ok:
                    _remove(st, v, b)
                    changed = True
            if st.dsize[v] == 0:
                return False
    return True


cdef bint _forward(HomState* st, int var, int a) nogil:
    cdef int k, e, s, u, v, b, other, nt = st.n_tgt
    for k in range(st.inc_ptr[var], st.inc_ptr[var + 1]):
        e = st.inc_idx[k]
        s = st.esym[e]; u = st.eu[e]; v = st.ev[e]
        if u == v:
            continue
        if u == var:
            other = v
            if st.assign[other] >= 0:
                continue
            for b in range(nt):
                if st.dom[other * nt + b] and not _adj(st, s, a, b):
                    _remove(st, other, b)
        else:
            other = u
            if st.assign[other] >= 0:
                continue
            for b in range(nt):
                if st.dom[other * nt + b] and not _adj(st, s, b, a):
                    _remove(st, other, b)
        if st.dsize[other] == 0:
            return False
    return True


cdef bint _search(HomState* st, int var) nogil:
    cdef int a, mark, nt = st.n_tgt
    if var == st.n_src:
        return True
    for a in range(nt):
        if not st.dom[var * nt + a]:
            continue
        mark = st.trail_top
        st.assign[var] = a
        if _forward(st, var, a):
            if _search(st, var + 1):
                return True
        _undo(st, mark)
        st.assign[var] = -1
    return False


def hom_search_binary(int n_src, edges, int n_tgt, adj, dom):
    """Lexicographically least homomorphism or None.

    edges: int32 (E, 3) rows (symbol, u, v); adj: uint8 (S, n_tgt, n_tgt);
    dom: uint8 (n_src, n_tgt) initial candidate sets.
    """
    if n_src == 0:
        return np.zeros(0, dtype=np.int32)
    if n_tgt == 0:
        return None
    cdef cnp.ndarray[int32_t, ndim=2] E = np.ascontiguousarray(edges, dtype=np.int32).reshape(-1, 3)
    cdef cnp.ndarray[uint8_t, ndim=3] A = np.ascontiguousarray(adj, dtype=np.uint8)
    cdef cnp.ndarray[uint8_t, ndim=2] D = np.array(dom, dtype=np.uint8, copy=True, order="C")
    cdef cnp.ndarray[int32_t, ndim=1] esym = np.ascontiguousarray(E[:, 0])
    cdef cnp.ndarray[int32_t, ndim=1] eu = np.ascontiguousarray(E[:, 1])
    cdef cnp.ndarray[int32_t, ndim=1] ev = np.ascontiguousarray(E[:, 2])
    cdef int m = E.shape[0]
    cdef cnp.ndarray[int32_t, ndim=1] dsize = D.sum(axis=1).astype(np.int32)
    # incidence lists
    counts = np.zeros(n_src + 1, dtype=np.int32)
    for e in range(m):
        counts[eu[e] + 1] += 1
        if ev[e] != eu[e]:
            counts[ev[e] + 1] += 1
    cdef cnp.ndarray[int32_t, ndim=1] ptr = np.cumsum(counts).astype(np.int32)
    cdef cnp.ndarray[int32_t, ndim=1] idx = np.zeros(max(int(ptr[n_src]), 1), dtype=np.int32)
    fill = ptr[:-1].copy()
    for e in range(m):
        idx[fill[eu[e]]] = e
        fill[eu[e]] += 1
        if ev[e] != eu[e]:
            idx[fill[ev[e]]] = e
            fill[ev[e]] += 1
    cdef cnp.ndarray[int32_t, ndim=1] trail = np.zeros(n_src * n_tgt + 1, dtype=np.int32)
    cdef cnp.ndarray[int32_t, ndim=1] assign = np.full(n_src, -1, dtype=np.int32)

    cdef HomState st
    st.n_src = n_src
    st.n_tgt = n_tgt
    st.n_edges = m
    st.esym = &esym[0] if m else NULL
    st.eu = &eu[0] if m else NULL
    st.ev = &ev[0] if m else NULL
    st.adj = &A[0, 0, 0] if A.size else NULL
    st.dom = &D[0, 0]
    st.dsize = &dsize[0]
    st.inc_ptr = &ptr[0]
    st.inc_idx = &idx[0]
    st.trail = &trail[0]
    st.trail_top = 0
    st.assign = &assign[0]

    cdef int i
    for i in range(n_src):
        if dsize[i] == 0:
            return None
    cdef bint found
    with nogil:
        found = _arc_consistency(&st)
        if found:
            found = _search(&st, 0)
    if not found:
        return None
    return assign.copy()


cdef struct HitState:
    int m
    int n_wit
    const uint64_t* wit
    const int64_t* weight
    int32_t* by_low_ptr     # witnesses grouped by lowest set bit
    int32_t* by_low_idx
    int64_t best_w
    uint64_t best_mask
    bint found


cdef void _hit_dfs(HitState* st, int bit, uint64_t mask, int64_t w) nogil:
    cdef int k
    cdef uint64_t one = 1
    if st.found and w >= st.best_w:
        return
    if bit < 0:
        st.best_w = w
        st.best_mask = mask
        st.found = True
        return
    # exclude first: ascending numeric mask order
    for k in range(st.by_low_ptr[bit], st.by_low_ptr[bit + 1]):
        if (st.wit[st.by_low_idx[k]] & mask) == 0:
            break
    else:
        _hit_dfs(st, bit - 1, mask, w)
    _hit_dfs(st, bit - 1, mask | (one << bit), w + st.weight[bit])


def min_hitting_deletion(witness_masks, weights):
    """Minimum-weight bit mask meeting every witness mask.

    Ties resolve to the numerically smallest mask. Returns (weight, mask),
    or None if some witness is empty.
    """
    cdef cnp.ndarray[uint64_t, ndim=1] W = np.ascontiguousarray(witness_masks, dtype=np.uint64).reshape(-1)
    cdef cnp.ndarray[int64_t, ndim=1] wt = np.ascontiguousarray(weights, dtype=np.int64).reshape(-1)
    cdef int m = wt.shape[0]
    cdef int n = W.shape[0]
    if m > 63:
        raise ValueError("at most 63 tuples supported")
    cdef int i, low
    cdef uint64_t x
    lows = np.zeros(n, dtype=np.int32)
    for i in range(n):
        x = W[i]
        if x == 0:
            return None
        low = 0
        while not (x >> low) & 1:
            low += 1
        lows[i] = low
    order = np.argsort(lows, kind="stable").astype(np.int32)
    counts = np.bincount(lows, minlength=m + 1)[: m + 1] if n else np.zeros(m + 1, dtype=np.int64)
    cdef cnp.ndarray[int32_t, ndim=1] ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int32)
    cdef cnp.ndarray[int32_t, ndim=1] idx = np.ascontiguousarray(order if n else np.zeros(1, dtype=np.int32))
    cdef uint64_t dummy_w = 0
    cdef int64_t dummy_wt = 0
    cdef HitState st
    st.m = m
    st.n_wit = n
    st.wit = &W[0] if n else &dummy_w
    st.weight = &wt[0] if m else &dummy_wt
    st.by_low_ptr = &ptr[0]
    st.by_low_idx = &idx[0]
    st.best_w = 0
    st.best_mask = 0
    st.found = False
    with nogil:
        _hit_dfs(&st, m - 1, 0, 0)
    return int(st.best_w), int(st.best_mask)
