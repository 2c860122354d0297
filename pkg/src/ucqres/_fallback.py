"""Pure-Python versions of the compiled kernels.

Same search order and tie-breaking as ``_kernels.pyx``, so both backends
return identical results.
"""

import numpy as np


def hom_search_binary(n_src, edges, n_tgt, adj, dom):
    if n_src == 0:
        return np.zeros(0, dtype=np.int32)
    if n_tgt == 0:
        return None
    edges = np.asarray(edges, dtype=np.int32).reshape(-1, 3).tolist()
    adj = np.asarray(adj, dtype=bool)
    # successor / predecessor sets per symbol for quick filtering
    succ = [[frozenset(np.flatnonzero(adj[s, a]).tolist()) for a in range(n_tgt)] for s in range(adj.shape[0])]
    pred = [[frozenset(np.flatnonzero(adj[s, :, b]).tolist()) for b in range(n_tgt)] for s in range(adj.shape[0])]
    doms = [set(np.flatnonzero(np.asarray(dom)[i]).tolist()) for i in range(n_src)]

    incident = [[] for _ in range(n_src)]
    for e, (s, u, v) in enumerate(edges):
        incident[u].append(e)
        if v != u:
            incident[v].append(e)

    for s, u, v in edges:
        if u == v:
            doms[u] = {a for a in doms[u] if a in succ[s][a]}
    if any(not d for d in doms):
        return None

    changed = True
    while changed:
        changed = False
        for s, u, v in edges:
            if u == v:
                continue
            keep = {a for a in doms[u] if not succ[s][a].isdisjoint(doms[v])}
            if len(keep) != len(doms[u]):
                doms[u] = keep
                changed = True
            if not keep:
                return None
            keep = {b for b in doms[v] if not pred[s][b].isdisjoint(doms[u])}
            if len(keep) != len(doms[v]):
                doms[v] = keep
                changed = True
            if not keep:
                return None

    assign = [-1] * n_src

    def forward(var, a):
        removed = []
        for e in incident[var]:
            s, u, v = edges[e]
            if u == v:
                continue
            if u == var:
                other, allowed = v, succ[s][a]
            else:
                other, allowed = u, pred[s][a]
            if assign[other] >= 0:
                continue
            drop = doms[other] - allowed
            if drop:
                doms[other] -= drop
                removed.append((other, drop))
            if not doms[other]:
                return removed, False
        return removed, True

    def search(var):
        if var == n_src:
            return True
        for a in sorted(doms[var]):
            if a not in doms[var]:
                continue
            assign[var] = a
            removed, ok = forward(var, a)
            if ok and search(var + 1):
                return True
            for other, drop in removed:
                doms[other] |= drop
            assign[var] = -1
        return False

    if not search(0):
        return None
    return np.asarray(assign, dtype=np.int32)


def min_hitting_deletion(witness_masks, weights):
    wit = [int(w) for w in witness_masks]
    wt = [int(w) for w in weights]
    m = len(wt)
    if m > 63:
        raise ValueError("at most 63 tuples supported")
    by_low = [[] for _ in range(m)]
    for w in wit:
        if w == 0:
            return None
        by_low[(w & -w).bit_length() - 1].append(w)

    best = [None, 0]

    def dfs(bit, mask, w):
        if best[0] is not None and w >= best[0]:
            return
        if bit < 0:
            best[0], best[1] = w, mask
            return
        if all(x & mask for x in by_low[bit]):
            dfs(bit - 1, mask, w)
        dfs(bit - 1, mask | (1 << bit), w + wt[bit])

    dfs(m - 1, 0, 0)
    return best[0], best[1]
