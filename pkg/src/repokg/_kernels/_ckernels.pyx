# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Must stay semantically identical to ``_pykernels.py``: same visit orders, same
tie-breaking, float64 accumulation.
"""

import numpy as np


def dot_scores(matrix, query):
    """Row-wise dot products of a float32 matrix against a query vector."""
    cdef float[:, ::1] mat = np.ascontiguousarray(matrix, dtype=np.float32)
    cdef double[::1] q = np.ascontiguousarray(query, dtype=np.float64)
    cdef Py_ssize_t n = mat.shape[0]
    cdef Py_ssize_t d = mat.shape[1]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(d):
            acc += <double> mat[i, j] * q[j]
        out[i] = acc
    return out_arr


def bfs_reachable(n, out_indptr, out_indices, out_kinds,
                  in_indptr, in_indices, in_kinds,
                  seeds, kind_mask, depth, use_out, use_in):
    """Nodes within ``depth`` hops of any seed along edges whose kind bit is set.

    Returns a sorted int32 array of reached node indices, seeds excluded.
    """
    cdef long long[::1] optr = np.ascontiguousarray(out_indptr, dtype=np.int64)
    cdef long long[::1] oidx = np.ascontiguousarray(out_indices, dtype=np.int64)
    cdef signed char[::1] oknd = np.ascontiguousarray(out_kinds, dtype=np.int8)
    cdef long long[::1] iptr = np.ascontiguousarray(in_indptr, dtype=np.int64)
    cdef long long[::1] iidx = np.ascontiguousarray(in_indices, dtype=np.int64)
    cdef signed char[::1] iknd = np.ascontiguousarray(in_kinds, dtype=np.int8)
    cdef long long[::1] seed_arr = np.ascontiguousarray(seeds, dtype=np.int64)
    cdef int nn = n
    cdef int mask = kind_mask
    cdef int max_depth = depth
    cdef bint w_out = use_out
    cdef bint w_in = use_in

    dist_arr = np.full(nn, -1, dtype=np.int32)
    cdef int[::1] dist = dist_arr
    queue_arr = np.empty(nn, dtype=np.int64)
    cdef long long[::1] queue = queue_arr
    reached_arr = np.empty(nn, dtype=np.int32)
    cdef int[::1] reached = reached_arr

    cdef Py_ssize_t head = 0, tail = 0, n_reached = 0
    cdef Py_ssize_t i, e
    cdef long long u, v
    cdef int d

    for i in range(seed_arr.shape[0]):
        u = seed_arr[i]
        if dist[u] < 0:
            dist[u] = 0
            queue[tail] = u
            tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        d = dist[u]
        if d >= max_depth:
            continue
        if w_out:
            for e in range(optr[u], optr[u + 1]):
                if not (mask >> oknd[e]) & 1:
                    continue
                v = oidx[e]
                if dist[v] < 0:
                    dist[v] = d + 1
                    reached[n_reached] = <int> v
                    n_reached += 1
                    queue[tail] = v
                    tail += 1
        if w_in:
            for e in range(iptr[u], iptr[u + 1]):
                if not (mask >> iknd[e]) & 1:
                    continue
                v = iidx[e]
                if dist[v] < 0:
                    dist[v] = d + 1
                    reached[n_reached] = <int> v
                    n_reached += 1
                    queue[tail] = v
                    tail += 1
    out = reached_arr[:n_reached].copy()
    out.sort()
    return out


def louvain_move_pass(indptr, indices, weights, labels, degree, tot, m2, resolution):
    """One local-moving pass over all nodes in index order; returns move count."""
    cdef long long[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef long long[::1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef long long[::1] lab = labels
    cdef double[::1] deg = degree
    cdef double[::1] tot_w = tot
    cdef double m2_ = m2
    cdef double res = resolution
    cdef Py_ssize_t n = lab.shape[0]

    comm_w_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] comm_w = comm_w_arr
    touched_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] touched = touched_arr
    seen_arr = np.zeros(n, dtype=np.int8)
    cdef signed char[::1] seen = seen_arr

    cdef Py_ssize_t u, e, t, n_touched
    cdef long long c_old, c, v, best_c
    cdef double k_u, gain, best_gain
    cdef int moves = 0

    for u in range(n):
        c_old = lab[u]
        k_u = deg[u]
        tot_w[c_old] -= k_u
        n_touched = 0
        # register c_old first so ties keep the current community
        touched[n_touched] = c_old
        n_touched += 1
        seen[c_old] = 1
        comm_w[c_old] = 0.0
        for e in range(ptr[u], ptr[u + 1]):
            v = idx[e]
            if v == u:
                continue
            c = lab[v]
            if not seen[c]:
                seen[c] = 1
                comm_w[c] = 0.0
                touched[n_touched] = c
                n_touched += 1
            comm_w[c] += w[e]
        best_c = c_old
        best_gain = comm_w[c_old] - res * tot_w[c_old] * k_u / m2_
        for t in range(1, n_touched):
            c = touched[t]
            gain = comm_w[c] - res * tot_w[c] * k_u / m2_
            if gain > best_gain:
                best_gain = gain
                best_c = c
        lab[u] = best_c
        tot_w[best_c] += k_u
        if best_c != c_old:
            moves += 1
        for t in range(n_touched):
            seen[touched[t]] = 0
    return moves


def labelprop_sweep(indptr, indices, weights, labels, order, tie_rand):
    """One asynchronous label-propagation sweep; returns number of relabels."""
    cdef long long[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef long long[::1] idx = np.ascontiguousarray(indices, dtype=np.int64)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef long long[::1] lab = labels
    cdef long long[::1] visit = np.ascontiguousarray(order, dtype=np.int64)
    cdef unsigned long long[::1] rnd = np.ascontiguousarray(tie_rand, dtype=np.uint64)
    cdef Py_ssize_t n = lab.shape[0]

    label_w_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] label_w = label_w_arr
    touched_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] touched = touched_arr
    seen_arr = np.zeros(n, dtype=np.int8)
    cdef signed char[::1] seen = seen_arr
    cand_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] cand = cand_arr

    cdef Py_ssize_t o, e, t, n_touched, n_cand, a, b
    cdef long long u, v, lv, current, tmp
    cdef double max_w
    cdef int changed = 0

    for o in range(visit.shape[0]):
        u = visit[o]
        n_touched = 0
        for e in range(ptr[u], ptr[u + 1]):
            v = idx[e]
            if v == u:
                continue
            lv = lab[v]
            if not seen[lv]:
                seen[lv] = 1
                label_w[lv] = 0.0
                touched[n_touched] = lv
                n_touched += 1
            label_w[lv] += w[e]
        if n_touched == 0:
            continue
        max_w = label_w[touched[0]]
        for t in range(1, n_touched):
            if label_w[touched[t]] > max_w:
                max_w = label_w[touched[t]]
        n_cand = 0
        for t in range(n_touched):
            if label_w[touched[t]] == max_w:
                cand[n_cand] = touched[t]
                n_cand += 1
        for t in range(n_touched):
            seen[touched[t]] = 0
        # insertion-sort candidates ascending (tiny lists)
        for a in range(1, n_cand):
            tmp = cand[a]
            b = a
            while b > 0 and cand[b - 1] > tmp:
                cand[b] = cand[b - 1]
                b -= 1
            cand[b] = tmp
        current = lab[u]
        for t in range(n_cand):
            if cand[t] == current:
                break
        else:
            lab[u] = cand[rnd[u] % <unsigned long long> n_cand]
            changed += 1
    return changed
