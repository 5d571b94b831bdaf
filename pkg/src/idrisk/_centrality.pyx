# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled centrality kernels over CSR adjacency arrays.

Semantics must stay in lockstep with `idrisk._centrality_py`, the pure-Python
twin selected at import when this extension is unavailable.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

COMPILED = True


def brandes_betweenness(cnp.int64_t[::1] indptr, cnp.int32_t[::1] indices, int n):
    """Directed unweighted betweenness, raw pair-dependency sums (no endpoints)."""
    bc_arr = np.zeros(n, dtype=np.float64)
    sigma_arr = np.zeros(n, dtype=np.float64)
    delta_arr = np.zeros(n, dtype=np.float64)
    dist_arr = np.empty(n, dtype=np.int32)
    order_arr = np.empty(n, dtype=np.int32)
    queue_arr = np.empty(n, dtype=np.int32)
    # Predecessor lists stored flat: every edge can be a predecessor link at
    # most once per source, so CSR-sized storage suffices.
    m = indptr[n]
    pred_arr = np.empty(m if m > 0 else 1, dtype=np.int32)
    pred_ptr_arr = np.zeros(n + 1, dtype=np.int64)
    pred_cnt_arr = np.zeros(n, dtype=np.int64)

    cdef double[::1] bc = bc_arr
    cdef double[::1] sigma = sigma_arr
    cdef double[::1] delta = delta_arr
    cdef int[::1] dist = dist_arr
    cdef int[::1] order = order_arr
    cdef int[::1] queue = queue_arr
    cdef int[::1] pred = pred_arr
    cdef cnp.int64_t[::1] pred_ptr = pred_ptr_arr
    cdef cnp.int64_t[::1] pred_cnt = pred_cnt_arr

    cdef int s, v, w, i, dv, qhead, qtail, n_order
    cdef cnp.int64_t idx, j
    cdef double coeff

    for s in range(n):
        for i in range(n):
            sigma[i] = 0.0
            delta[i] = 0.0
            dist[i] = -1
            pred_cnt[i] = 0
        sigma[s] = 1.0
        dist[s] = 0
        queue[0] = s
        qhead = 0
        qtail = 1
        n_order = 0
        while qhead < qtail:
            v = queue[qhead]
            qhead += 1
            order[n_order] = v
            n_order += 1
            dv = dist[v]
            for idx in range(indptr[v], indptr[v + 1]):
                w = indices[idx]
                if dist[w] < 0:
                    dist[w] = dv + 1
                    queue[qtail] = w
                    qtail += 1
                if dist[w] == dv + 1:
                    sigma[w] += sigma[v]
                    pred_cnt[w] += 1
        # Lay out predecessor storage for this source.
        pred_ptr[0] = 0
        for i in range(n):
            pred_ptr[i + 1] = pred_ptr[i] + pred_cnt[i]
            pred_cnt[i] = 0
        for j in range(n_order):
            v = order[j]
            dv = dist[v]
            for idx in range(indptr[v], indptr[v + 1]):
                w = indices[idx]
                if dist[w] == dv + 1:
                    pred[pred_ptr[w] + pred_cnt[w]] = v
                    pred_cnt[w] += 1
        # Dependency accumulation in reverse BFS order.
        for j in range(n_order - 1, -1, -1):
            w = order[j]
            coeff = (1.0 + delta[w]) / sigma[w]
            for idx in range(pred_ptr[w], pred_ptr[w] + pred_cnt[w]):
                v = pred[idx]
                delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
    return bc_arr


def incoming_closeness(cnp.int64_t[::1] rindptr, cnp.int32_t[::1] rindices, int n):
    """Wasserman-Faust closeness over incoming distances (reversed-graph CSR)."""
    out_arr = np.zeros(n, dtype=np.float64)
    if n <= 1:
        return out_arr
    dist_arr = np.empty(n, dtype=np.int32)
    queue_arr = np.empty(n, dtype=np.int32)

    cdef double[::1] out = out_arr
    cdef int[::1] dist = dist_arr
    cdef int[::1] queue = queue_arr

    cdef int v, u, w, i, du, qhead, qtail
    cdef cnp.int64_t idx
    cdef cnp.int64_t reachers, total

    for v in range(n):
        for i in range(n):
            dist[i] = -1
        dist[v] = 0
        reachers = 0
        total = 0
        queue[0] = v
        qhead = 0
        qtail = 1
        while qhead < qtail:
            u = queue[qhead]
            qhead += 1
            du = dist[u]
            for idx in range(rindptr[u], rindptr[u + 1]):
                w = rindices[idx]
                if dist[w] < 0:
                    dist[w] = du + 1
                    reachers += 1
                    total += du + 1
                    queue[qtail] = w
                    qtail += 1
        if reachers > 0 and total > 0:
            out[v] = (<double>reachers / (n - 1)) * (<double>reachers / total)
    return out_arr
