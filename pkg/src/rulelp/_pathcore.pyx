# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled traversal kernels; contract documented in ``_pathcore_py``.

The two modules are interchangeable twins: every public function here must
accept the same arguments and return the same values as its pure-Python
counterpart, bit for bit.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.int32_t i32
ctypedef cnp.uint8_t u8

DEF MAX_DEPTH = 16

NO_EDGE = (-1, -1, -1, -1)


cdef inline bint _has(i32[::1] nbrs, i64 lo, i64 hi, int v) noexcept nogil:
    cdef i64 mid
    cdef i64 a = lo, b = hi
    while a < b:
        mid = (a + b) >> 1
        if nbrs[mid] < v:
            a = mid + 1
        else:
            b = mid
    return a < hi and nbrs[a] == v


cdef inline bint _excl_hop(int u, int lab, int v, int et, int eh,
                           int efr, int err) noexcept nogil:
    return (u == et and lab == efr and v == eh) or \
           (u == eh and lab == err and v == et)


cdef bint _holds(i64[::1] indptr, i32[::1] nbrs, int L, i32[::1] body,
                 int x, int y, int et, int eh, int efr, int err) noexcept nogil:
    cdef int l = body.shape[0]
    cdef int path[MAX_DEPTH + 1]
    cdef i64 ptr[MAX_DEPTH + 1]
    cdef i64 end[MAX_DEPTH + 1]
    cdef int d, u, v, i, lab
    cdef i64 lo, hi
    cdef bint clash
    if x == y or l > MAX_DEPTH:
        return False
    if l == 1:
        lab = body[0]
        lo = indptr[x * L + lab]
        hi = indptr[x * L + lab + 1]
        return _has(nbrs, lo, hi, y) and not _excl_hop(x, lab, y, et, eh, efr, err)
    path[0] = x
    lab = body[0]
    ptr[0] = indptr[x * L + lab]
    end[0] = indptr[x * L + lab + 1]
    d = 0
    while d >= 0:
        if ptr[d] < end[d]:
            u = path[d]
            v = nbrs[ptr[d]]
            ptr[d] += 1
            if v == y or _excl_hop(u, body[d], v, et, eh, efr, err):
                continue
            clash = False
            for i in range(d + 1):
                if path[i] == v:
                    clash = True
                    break
            if clash:
                continue
            path[d + 1] = v
            if d + 2 == l:
                lab = body[l - 1]
                lo = indptr[v * L + lab]
                hi = indptr[v * L + lab + 1]
                if _has(nbrs, lo, hi, y) and \
                        not _excl_hop(v, lab, y, et, eh, efr, err):
                    return True
            else:
                d += 1
                lab = body[d]
                ptr[d] = indptr[v * L + lab]
                end[d] = indptr[v * L + lab + 1]
        else:
            d -= 1
    return False


cdef int _reach_collect(i64[::1] indptr, i32[::1] nbrs, int L, i32[::1] body,
                        int start, int et, int eh, int efr, int err,
                        u8[::1] hit, i32[::1] out) noexcept nogil:
    """Mark + collect endpoints of simple paths; resets ``hit``; returns count."""
    cdef int l = body.shape[0]
    cdef int path[MAX_DEPTH + 1]
    cdef i64 ptr[MAX_DEPTH + 1]
    cdef i64 end[MAX_DEPTH + 1]
    cdef int d, u, v, w, i, lab
    cdef i64 p, lo, hi
    cdef int cnt = 0
    cdef bint clash
    if l > MAX_DEPTH:
        return 0
    if l == 1:
        lab = body[0]
        lo = indptr[start * L + lab]
        hi = indptr[start * L + lab + 1]
        for p in range(lo, hi):
            v = nbrs[p]
            if v != start and not _excl_hop(start, lab, v, et, eh, efr, err):
                if not hit[v]:
                    hit[v] = 1
                    out[cnt] = v
                    cnt += 1
    else:
        path[0] = start
        lab = body[0]
        ptr[0] = indptr[start * L + lab]
        end[0] = indptr[start * L + lab + 1]
        d = 0
        while d >= 0:
            if ptr[d] < end[d]:
                u = path[d]
                v = nbrs[ptr[d]]
                ptr[d] += 1
                if _excl_hop(u, body[d], v, et, eh, efr, err):
                    continue
                clash = False
                for i in range(d + 1):
                    if path[i] == v:
                        clash = True
                        break
                if clash:
                    continue
                path[d + 1] = v
                if d + 2 == l:
                    lab = body[l - 1]
                    lo = indptr[v * L + lab]
                    hi = indptr[v * L + lab + 1]
                    for p in range(lo, hi):
                        w = nbrs[p]
                        if hit[w] or _excl_hop(v, lab, w, et, eh, efr, err):
                            continue
                        clash = False
                        for i in range(d + 2):
                            if path[i] == w:
                                clash = True
                                break
                        if not clash:
                            hit[w] = 1
                            out[cnt] = w
                            cnt += 1
                else:
                    d += 1
                    lab = body[d]
                    ptr[d] = indptr[v * L + lab]
                    end[d] = indptr[v * L + lab + 1]
            else:
                d -= 1
    for i in range(cnt):
        hit[out[i]] = 0
    return cnt


def holds(indptr, nbrs, num_labels, body, x, y, excl=NO_EDGE):
    cdef i32[::1] b = np.asarray(body, dtype=np.int32)
    return _holds(indptr, nbrs, num_labels, b, x, y,
                  excl[0], excl[1], excl[2], excl[3])


def reachable(indptr, nbrs, num_labels, num_entities, body, start,
              excl=NO_EDGE):
    cdef i32[::1] b = np.asarray(body, dtype=np.int32)
    hit = np.zeros(num_entities, dtype=np.uint8)
    out = np.empty(num_entities, dtype=np.int32)
    cdef int cnt = _reach_collect(indptr, nbrs, num_labels, b, start,
                                  excl[0], excl[1], excl[2], excl[3],
                                  hit, out)
    res = out[:cnt]
    res.sort()
    return res


def coverage(indptr, nbrs, num_labels, body, tails, heads, rel, rev_rel):
    cdef i32[::1] b = np.asarray(body, dtype=np.int32)
    cdef i32[::1] ts = tails
    cdef i32[::1] hs = heads
    cdef int m = ts.shape[0]
    out_arr = np.zeros(m, dtype=np.uint8)
    cdef u8[::1] out = out_arr
    cdef i64[::1] ip = indptr
    cdef i32[::1] nb = nbrs
    cdef int L = num_labels
    cdef int r = rel, rr = rev_rel
    cdef int i
    with nogil:
        for i in range(m):
            if _holds(ip, nb, L, b, ts[i], hs[i], ts[i], hs[i], r, rr):
                out[i] = 1
    return out_arr


def neg_total(indptr, nbrs, num_labels, num_entities, body, rev_body,
              tails, heads, rel, rev_rel, edge_idx):
    cdef i32[::1] b = np.asarray(body, dtype=np.int32)
    cdef i32[::1] rb = np.asarray(rev_body, dtype=np.int32)
    cdef i32[::1] ts = tails
    cdef i32[::1] hs = heads
    cdef i64[::1] idx = np.asarray(edge_idx, dtype=np.int64)
    cdef i64[::1] ip = indptr
    cdef i32[::1] nb = nbrs
    cdef int L = num_labels
    cdef int r = rel, rr = rev_rel
    hit_arr = np.zeros(num_entities, dtype=np.uint8)
    out_arr = np.empty(num_entities, dtype=np.int32)
    cdef u8[::1] hit = hit_arr
    cdef i32[::1] out = out_arr
    cdef long total = 0
    cdef int t, h, cnt, j
    cdef i64 k, lo, hi
    with nogil:
        for k in range(idx.shape[0]):
            t = ts[idx[k]]
            h = hs[idx[k]]
            cnt = _reach_collect(ip, nb, L, b, t, t, h, r, rr, hit, out)
            lo = ip[t * L + r]
            hi = ip[t * L + r + 1]
            for j in range(cnt):
                if not _has(nb, lo, hi, out[j]):
                    total += 1
            cnt = _reach_collect(ip, nb, L, rb, h, t, h, r, rr, hit, out)
            lo = ip[h * L + rr]
            hi = ip[h * L + rr + 1]
            for j in range(cnt):
                if not _has(nb, lo, hi, out[j]):
                    total += 1
    return int(total)


def bfs_dists(indptr, nbrs, num_labels, num_entities, start, excl=NO_EDGE):
    cdef i64[::1] ip = indptr
    cdef i32[::1] nb = nbrs
    cdef int L = num_labels
    cdef int et = excl[0], eh = excl[1], efr = excl[2], err = excl[3]
    dist_arr = np.full(num_entities, -1, dtype=np.int32)
    queue_arr = np.empty(num_entities, dtype=np.int32)
    cdef i32[::1] dist = dist_arr
    cdef i32[::1] queue = queue_arr
    cdef int qh = 0, qt = 0
    cdef int u, v, lab
    cdef i64 p, base
    dist[start] = 0
    queue[qt] = start
    qt += 1
    with nogil:
        while qh < qt:
            u = queue[qh]
            qh += 1
            base = <i64> u * L
            for lab in range(L):
                for p in range(ip[base + lab], ip[base + lab + 1]):
                    v = nb[p]
                    if dist[v] == -1 and not _excl_hop(u, lab, v, et, eh,
                                                       efr, err):
                        dist[v] = dist[u] + 1
                        queue[qt] = v
                        qt += 1
    return dist_arr


def lex_path(indptr, nbrs, num_labels, x, y, exact_len, excl, dist_to_target):
    cdef i64[::1] ip = indptr
    cdef i32[::1] nb = nbrs
    cdef i32[::1] dt = np.asarray(dist_to_target, dtype=np.int32)
    cdef int L = num_labels
    cdef int et = excl[0], eh = excl[1], efr = excl[2], err = excl[3]
    cdef int xx = x, yy = y, el = exact_len
    cdef int path[MAX_DEPTH + 1]
    cdef int labs[MAX_DEPTH + 1]
    cdef i64 ptr[MAX_DEPTH + 1]
    cdef int d, u, v, i, dd
    cdef bint clash, found
    if xx == yy or el > MAX_DEPTH or el < 1:
        return None
    path[0] = xx
    labs[0] = 0
    ptr[0] = ip[<i64> xx * L]
    d = 0
    found = False
    with nogil:
        while d >= 0:
            u = path[d]
            if labs[d] >= L:
                d -= 1
                continue
            if ptr[d] >= ip[<i64> u * L + labs[d] + 1]:
                labs[d] += 1
                if labs[d] < L:
                    ptr[d] = ip[<i64> u * L + labs[d]]
                continue
            v = nb[ptr[d]]
            ptr[d] += 1
            if _excl_hop(u, labs[d], v, et, eh, efr, err):
                continue
            if v == yy:
                if d + 1 == el:
                    found = True
                    break
                continue
            if d + 1 >= el:
                continue
            dd = dt[v]
            if dd < 0 or d + 1 + dd > el:
                continue
            clash = False
            for i in range(d + 1):
                if path[i] == v:
                    clash = True
                    break
            if clash:
                continue
            d += 1
            path[d] = v
            labs[d] = 0
            ptr[d] = ip[<i64> v * L]
    if not found:
        return None
    out = np.empty(el, dtype=np.int32)
    for i in range(el):
        out[i] = labs[i]
    return out


def edge_labels(indptr, nbrs, num_labels, u, v):
    cdef i64[::1] ip = indptr
    cdef i32[::1] nb = nbrs
    cdef int L = num_labels
    cdef i64 base = <i64> u * L
    cdef int lab
    out = []
    for lab in range(L):
        if _has(nb, ip[base + lab], ip[base + lab + 1], v):
            out.append(lab)
    return out


def two_hop_bodies(indptr, nbrs, num_labels, u, v):
    cdef i64[::1] ip = indptr
    cdef i32[::1] nb = nbrs
    cdef int L = num_labels
    cdef i64 base = <i64> u * L
    cdef i64 mbase
    cdef int lab1, lab2, mid
    cdef i64 p
    out = set()
    for lab1 in range(L):
        for p in range(ip[base + lab1], ip[base + lab1 + 1]):
            mid = nb[p]
            if mid == u or mid == v:
                continue
            mbase = <i64> mid * L
            for lab2 in range(L):
                if _has(nb, ip[mbase + lab2], ip[mbase + lab2 + 1], v):
                    out.add((lab1, lab2))
    return out
