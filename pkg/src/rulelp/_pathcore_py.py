"""Pure-Python traversal kernels.

Same contract as the compiled ``_pathcore`` extension; selected by
``rulelp.paths`` when the extension is unavailable or explicitly disabled.
All functions operate on the flat CSR adjacency of a knowledge graph:
``indptr[node * num_labels + label]`` slices the sorted neighbor array.

Paths are *simple* (no repeated nodes, endpoints included).  An exclusion
``(excl_t, excl_h, excl_fr, excl_rr)`` removes both directed realizations of
one labeled edge: hops (excl_t --excl_fr--> excl_h) and
(excl_h --excl_rr--> excl_t).  ``excl_t = -1`` disables exclusion.
"""

from __future__ import annotations

from bisect import bisect_left

import numpy as np

NO_EDGE = (-1, -1, -1, -1)


def _slice(indptr, nbrs, num_labels, node, label):
    base = node * num_labels + label
    return nbrs[indptr[base]:indptr[base + 1]]


def _contains(sorted_arr, v) -> bool:
    i = bisect_left(sorted_arr, v)
    return i < len(sorted_arr) and sorted_arr[i] == v


def _excluded(u, lab, v, excl):
    et, eh, efr, err = excl
    return (u == et and lab == efr and v == eh) or \
           (u == eh and lab == err and v == et)


def holds(indptr, nbrs, num_labels, body, x, y, excl=NO_EDGE) -> bool:
    """True iff a simple path x -> ... -> y realizes the label sequence."""
    if x == y:
        return False
    last = len(body) - 1
    path = [x]

    def dfs(u, depth) -> bool:
        lab = body[depth]
        adj = _slice(indptr, nbrs, num_labels, u, lab)
        if depth == last:
            return _contains(adj, y) and y not in path \
                and not _excluded(u, lab, y, excl)
        for v in adj:
            v = int(v)
            if v == y or v in path or _excluded(u, lab, v, excl):
                continue
            path.append(v)
            if dfs(v, depth + 1):
                return True
            path.pop()
        return False

    return dfs(x, 0)


def reachable(indptr, nbrs, num_labels, num_entities, body, start,
              excl=NO_EDGE) -> np.ndarray:
    """Sorted endpoints of all simple paths from ``start`` along ``body``."""
    last = len(body) - 1
    hit = np.zeros(num_entities, dtype=bool)
    path = [start]

    def dfs(u, depth):
        lab = body[depth]
        adj = _slice(indptr, nbrs, num_labels, u, lab)
        if depth == last:
            for v in adj:
                v = int(v)
                if v not in path and not _excluded(u, lab, v, excl):
                    hit[v] = True
            return
        for v in adj:
            v = int(v)
            if v in path or _excluded(u, lab, v, excl):
                continue
            path.append(v)
            dfs(v, depth + 1)
            path.pop()

    dfs(start, 0)
    return np.flatnonzero(hit).astype(np.int32)


def coverage(indptr, nbrs, num_labels, body, tails, heads, rel,
             rev_rel) -> np.ndarray:
    """Per-edge bit: does the clause hold for edge i with itself excluded."""
    m = len(tails)
    out = np.zeros(m, dtype=np.uint8)
    for i in range(m):
        t, h = int(tails[i]), int(heads[i])
        if holds(indptr, nbrs, num_labels, body, t, h, (t, h, rel, rev_rel)):
            out[i] = 1
    return out


def neg_total(indptr, nbrs, num_labels, num_entities, body, rev_body,
              tails, heads, rel, rev_rel, edge_idx) -> int:
    """Invalid endpoint count over the given edge rows.

    For edge (t, h): endpoints reached from t along ``body`` that are not
    known heads of (t, rel, .), plus nodes reached from h along ``rev_body``
    that are not known tails of (., rel, h).  The edge itself is excluded
    from traversal.
    """
    total = 0
    for i in edge_idx:
        t, h = int(tails[i]), int(heads[i])
        excl = (t, h, rel, rev_rel)
        valid_heads = _slice(indptr, nbrs, num_labels, t, rel)
        for v in reachable(indptr, nbrs, num_labels, num_entities, body, t,
                           excl):
            if not _contains(valid_heads, v):
                total += 1
        valid_tails = _slice(indptr, nbrs, num_labels, h, rev_rel)
        for u in reachable(indptr, nbrs, num_labels, num_entities, rev_body,
                           h, excl):
            if not _contains(valid_tails, u):
                total += 1
    return total


def bfs_dists(indptr, nbrs, num_labels, num_entities, start,
              excl=NO_EDGE) -> np.ndarray:
    """Hop distance from ``start`` to every node, -1 when unreachable.

    The label alphabet is closed under reversal, so distances from y equal
    distances to y; callers rely on this for pruning.
    """
    dist = np.full(num_entities, -1, dtype=np.int32)
    dist[start] = 0
    frontier = [start]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            base = u * num_labels
            for lab in range(num_labels):
                for v in nbrs[indptr[base + lab]:indptr[base + lab + 1]]:
                    v = int(v)
                    if dist[v] == -1 and not _excluded(u, lab, v, excl):
                        dist[v] = d
                        nxt.append(v)
        frontier = nxt
    return dist


def lex_path(indptr, nbrs, num_labels, x, y, exact_len, excl,
             dist_to_target) -> np.ndarray | None:
    """First simple path x -> y of the exact length, in DFS order.

    Expansion tries labels ascending and neighbors ascending at every hop,
    so the returned label sequence is the lexicographic minimum over the
    interleaved (label, node) decision sequence.  ``dist_to_target`` prunes
    branches that cannot reach y in the remaining budget; y is only allowed
    as the terminal node.
    """
    if x == y:
        return None
    labels = [0] * exact_len
    path = [x]

    def dfs(u, depth) -> bool:
        base = u * num_labels
        for lab in range(num_labels):
            for v in nbrs[indptr[base + lab]:indptr[base + lab + 1]]:
                v = int(v)
                if _excluded(u, lab, v, excl):
                    continue
                if v == y:
                    if depth + 1 == exact_len:
                        labels[depth] = lab
                        return True
                    continue
                if depth + 1 >= exact_len or v in path:
                    continue
                d = dist_to_target[v]
                if d < 0 or depth + 1 + d > exact_len:
                    continue
                labels[depth] = lab
                path.append(v)
                if dfs(v, depth + 1):
                    return True
                path.pop()
        return False

    if dfs(x, 0):
        return np.array(labels, dtype=np.int32)
    return None


def edge_labels(indptr, nbrs, num_labels, u, v) -> list[int]:
    """All labels lab with an edge u --lab--> v."""
    out = []
    base = u * num_labels
    for lab in range(num_labels):
        if _contains(nbrs[indptr[base + lab]:indptr[base + lab + 1]], v):
            out.append(lab)
    return out


def two_hop_bodies(indptr, nbrs, num_labels, u, v) -> set[tuple[int, int]]:
    """Label pairs of simple two-hop paths u -> mid -> v (requires u != v)."""
    out: set[tuple[int, int]] = set()
    base = u * num_labels
    for lab1 in range(num_labels):
        for mid in nbrs[indptr[base + lab1]:indptr[base + lab1 + 1]]:
            mid = int(mid)
            if mid == u or mid == v:
                continue
            for lab2 in edge_labels(indptr, nbrs, num_labels, mid, v):
                out.add((lab1, lab2))
    return out
