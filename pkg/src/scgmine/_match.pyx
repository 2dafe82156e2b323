# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled subgraph matching kernel (same contract as ``_match_py.match``)."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


cdef struct Problem:
    int pn
    int hn
    cnp.int64_t* p_labels
    cnp.uint64_t* p_adj
    cnp.int64_t* order
    cnp.int64_t* anchor
    cnp.int64_t* p_outdeg
    cnp.int64_t* p_indeg
    cnp.int64_t* h_labels
    cnp.uint64_t* h_adj
    cnp.int64_t* h_outdeg
    cnp.int64_t* h_indeg
    cnp.int64_t* h_indptr
    cnp.int64_t* h_indices
    cnp.int64_t* h_order
    cnp.int64_t* mapping
    char* used
    long limit
    long budget
    long expansions
    bint exhausted


cdef inline bint feasible(Problem* pr, int pu, int hv, int depth) noexcept:
    cdef int pn = pr.pn, hn = pr.hn, j, pw, hw
    cdef cnp.uint64_t m
    if pr.h_labels[hv] != pr.p_labels[pu] or pr.used[hv]:
        return False
    if pr.h_outdeg[hv] < pr.p_outdeg[pu] or pr.h_indeg[hv] < pr.p_indeg[pu]:
        return False
    m = pr.p_adj[pu * pn + pu]
    if m and (pr.h_adj[hv * hn + hv] & m) != m:
        return False
    for j in range(depth):
        pw = <int>pr.order[j]
        hw = <int>pr.mapping[pw]
        m = pr.p_adj[pu * pn + pw]
        if m and (pr.h_adj[<long>hv * hn + hw] & m) != m:
            return False
        m = pr.p_adj[pw * pn + pu]
        if m and (pr.h_adj[<long>hw * hn + hv] & m) != m:
            return False
    return True


cdef bint search(Problem* pr, int depth, set images) except -1:
    cdef int pu, a, ha, hv
    cdef long k, start, stop
    cdef cnp.int64_t* cands
    if depth == pr.pn:
        images.add(tuple(sorted([pr.mapping[k] for k in range(pr.pn)])))
        return pr.limit > 0 and len(images) >= pr.limit
    pu = <int>pr.order[depth]
    a = <int>pr.anchor[depth]
    if a >= 0:
        ha = <int>pr.mapping[a]
        start = pr.h_indptr[ha]
        stop = pr.h_indptr[ha + 1]
        cands = pr.h_indices
    else:
        start = 0
        stop = pr.hn
        cands = pr.h_order
    for k in range(start, stop):
        hv = <int>cands[k]
        pr.expansions += 1
        if pr.budget > 0 and pr.expansions > pr.budget:
            pr.exhausted = True
            return True
        if not feasible(pr, pu, hv, depth):
            continue
        pr.mapping[pu] = hv
        pr.used[hv] = 1
        if search(pr, depth + 1, images):
            pr.used[hv] = 0
            pr.mapping[pu] = -1
            return True
        pr.used[hv] = 0
        pr.mapping[pu] = -1
    return False


def _i64(x):
    return np.ascontiguousarray(x, dtype=np.int64)


def _u64(x):
    return np.ascontiguousarray(x, dtype=np.uint64)


def match(p_labels, p_adj, order, anchor, p_outdeg, p_indeg,
          h_labels, h_adj, h_outdeg, h_indeg, h_indptr, h_indices, h_order,
          long limit, long budget):
    cdef cnp.int64_t[::1] pl = _i64(p_labels), po = _i64(order), pa = _i64(anchor)
    cdef cnp.int64_t[::1] pod = _i64(p_outdeg), pid = _i64(p_indeg)
    cdef cnp.uint64_t[::1] padj = _u64(p_adj), hadj = _u64(h_adj)
    cdef cnp.int64_t[::1] hl = _i64(h_labels), hod = _i64(h_outdeg), hid = _i64(h_indeg)
    cdef cnp.int64_t[::1] hip = _i64(h_indptr), hix = _i64(h_indices), hor = _i64(h_order)
    cdef int pn = pl.shape[0], hn = hl.shape[0]
    if pn == 0:
        return 1, False
    if pn > hn:
        return 0, False
    cdef cnp.int64_t[::1] mapping = np.full(pn, -1, dtype=np.int64)
    cdef cnp.int8_t[::1] used = np.zeros(hn, dtype=np.int8)
    cdef Problem pr
    cdef cnp.int64_t* empty = NULL
    pr.pn = pn
    pr.hn = hn
    pr.p_labels = &pl[0]
    pr.p_adj = &padj[0]
    pr.order = &po[0]
    pr.anchor = &pa[0]
    pr.p_outdeg = &pod[0]
    pr.p_indeg = &pid[0]
    pr.h_labels = &hl[0]
    pr.h_adj = &hadj[0]
    pr.h_outdeg = &hod[0]
    pr.h_indeg = &hid[0]
    pr.h_indptr = &hip[0]
    pr.h_indices = &hix[0] if hix.shape[0] > 0 else empty
    pr.h_order = &hor[0]
    pr.mapping = &mapping[0]
    pr.used = <char*>&used[0]
    pr.limit = limit
    pr.budget = budget
    pr.expansions = 0
    pr.exhausted = False
    images = set()
    search(&pr, 0, images)
    return len(images), bool(pr.exhausted)
