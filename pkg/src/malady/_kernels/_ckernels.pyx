# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contracts as ``_pykernels``.

Per-class member sets are binary min-heaps keyed by ``(bid, index)``,
stored back to back in one flat buffer.
"""
import numpy as np
cimport numpy as cnp

from ..errors import ConvergenceError

cnp.import_array()


cdef inline bint _less(double[::1] bids, Py_ssize_t x, Py_ssize_t y) noexcept nogil:
    return bids[x] < bids[y] or (bids[x] == bids[y] and x < y)


cdef void _sift_up(Py_ssize_t[::1] heap, Py_ssize_t off, Py_ssize_t pos,
                   double[::1] bids) noexcept nogil:
    cdef Py_ssize_t item = heap[off + pos], parent
    while pos > 0:
        parent = (pos - 1) >> 1
        if _less(bids, item, heap[off + parent]):
            heap[off + pos] = heap[off + parent]
            pos = parent
        else:
            break
    heap[off + pos] = item


cdef void _sift_down(Py_ssize_t[::1] heap, Py_ssize_t off, Py_ssize_t size,
                     double[::1] bids) noexcept nogil:
    cdef Py_ssize_t pos = 0, child, item = heap[off]
    while True:
        child = 2 * pos + 1
        if child >= size:
            break
        if child + 1 < size and _less(bids, heap[off + child + 1], heap[off + child]):
            child += 1
        if _less(bids, heap[off + child], item):
            heap[off + pos] = heap[off + child]
            pos = child
        else:
            break
    heap[off + pos] = item


cdef inline void _best_two(const double[:, ::1] a, Py_ssize_t x, double[::1] d,
                           char[::1] avail, Py_ssize_t* i_star,
                           Py_ssize_t* i_next) noexcept nogil:
    cdef Py_ssize_t i, K = a.shape[1]
    cdef double v, v_star = 0.0, v_next = 0.0
    i_star[0] = -1
    i_next[0] = -1
    for i in range(K):
        if not avail[i]:
            continue
        v = a[x, i] - d[i]
        if i_star[0] < 0 or v > v_star:
            i_next[0] = i_star[0]
            v_next = v_star
            i_star[0] = i
            v_star = v
        elif i_next[0] < 0 or v > v_next:
            i_next[0] = i
            v_next = v


cdef inline double _bid(const double[:, ::1] a, Py_ssize_t x, double[::1] d,
                        Py_ssize_t i_star, Py_ssize_t i_next, double eps) noexcept nogil:
    cdef double v = a[x, i_star] - d[i_star]
    cdef double w = v
    if i_next >= 0:
        w = a[x, i_next] - d[i_next]
    return d[i_star] + eps + (v - w)


def _run_forward(double eps, lower, cap_arr, const double[:, ::1] a, d0,
                 long long max_events, bint membership):
    """Shared forward auction body; ``membership`` selects the price rules."""
    cdef Py_ssize_t n = a.shape[0], K = a.shape[1]
    cdef Py_ssize_t i, x, y, b_i, i_star, i_next, size, n_pending, n_evicted
    cdef long long events = 0
    cdef double b, m
    cdef Py_ssize_t[::1] cap = np.asarray(cap_arr, dtype=np.intp).copy()
    cdef Py_ssize_t[::1] lo = np.asarray(lower, dtype=np.intp).copy()
    cdef double[::1] d = np.array(d0, dtype=np.float64)
    cdef char[::1] avail = np.zeros(K, dtype=np.int8)
    cdef Py_ssize_t[::1] offs = np.zeros(K, dtype=np.intp)
    cdef Py_ssize_t[::1] sizes = np.zeros(K, dtype=np.intp)
    cdef Py_ssize_t total = 0
    for i in range(K):
        if cap[i] > n:
            cap[i] = n
        avail[i] = cap[i] > 0
        offs[i] = total
        total += cap[i]
    cdef Py_ssize_t[::1] heap = np.zeros(max(total, 1), dtype=np.intp)
    assign_arr = np.full(n, -1, dtype=np.int64)
    bids_arr = np.zeros(n, dtype=np.float64)
    cdef long long[::1] assign = assign_arr
    cdef double[::1] bids = bids_arr
    cdef Py_ssize_t[::1] pending = np.arange(n, dtype=np.intp)
    cdef Py_ssize_t[::1] evicted = np.zeros(n, dtype=np.intp)
    cdef Py_ssize_t[::1] sorted_ev
    n_pending = n
    while n_pending > 0:
        n_evicted = 0
        for b_i in range(n_pending):
            x = pending[b_i]
            events += 1
            if events > max_events:
                kind = "membership" if membership else "upper bound"
                raise ConvergenceError(
                    f"{kind} auction exceeded {max_events} bidding events")
            _best_two(a, x, d, avail, &i_star, &i_next)
            b = _bid(a, x, d, i_star, i_next, eps)
            bids[x] = b
            assign[x] = i_star
            size = sizes[i_star]
            if size == cap[i_star] or (not membership and size == lo[i_star]
                                       and d[i_star] < 0.0 and size > 0):
                y = heap[offs[i_star]]
                heap[offs[i_star]] = x
                _sift_down(heap, offs[i_star], size, bids)
                assign[y] = -1
                evicted[n_evicted] = y
                n_evicted += 1
                m = bids[heap[offs[i_star]]]
                if size == cap[i_star] or membership:
                    d[i_star] = m
                else:
                    d[i_star] = m if m < 0.0 else 0.0
            else:
                heap[offs[i_star] + size] = x
                _sift_up(heap, offs[i_star], size, bids)
                sizes[i_star] = size + 1
                if membership and size + 1 == cap[i_star]:
                    d[i_star] = bids[heap[offs[i_star]]]
        order = np.sort(np.asarray(evicted[:n_evicted]))
        sorted_ev = order
        for b_i in range(n_evicted):
            pending[b_i] = sorted_ev[b_i]
        n_pending = n_evicted
    return assign_arr, bids_arr, np.asarray(d), events


def membership_auction(double eps, volumes, a, p0, long long max_events):
    a = np.ascontiguousarray(a, dtype=np.float64)
    return _run_forward(eps, np.zeros(len(volumes), dtype=np.intp), volumes,
                        a, p0, max_events, True)


def upper_bound_auction(double eps, lower, upper, a, d0, long long max_events):
    a = np.ascontiguousarray(a, dtype=np.float64)
    return _run_forward(eps, lower, upper, a, d0, max_events, False)


def lower_bound_pass(double eps, lower, upper, a_in, double[::1] d,
                     long long[::1] assign, double[::1] bids, long long[::1] counts,
                     long long max_events):
    cdef const double[:, ::1] a = np.ascontiguousarray(a_in, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0], K = a.shape[1]
    cdef Py_ssize_t i, j, x, y
    cdef long long events = 0
    cdef double best, delta, di
    cdef long long[::1] lo = np.asarray(lower, dtype=np.int64)
    cdef long long[::1] hi = np.asarray(upper, dtype=np.int64)
    moves = []
    for i in range(K):
        while (counts[i] < hi[i] and d[i] > 0.0) or counts[i] < lo[i]:
            events += 1
            if events > max_events:
                raise ConvergenceError(
                    f"lower bound auction exceeded {max_events} events")
            x = -1
            best = 0.0
            di = d[i]
            for y in range(n):
                j = assign[y]
                if j == i:
                    continue
                delta = (a[y, j] - d[j]) - (a[y, i] - di)
                if x < 0 or delta < best:
                    x = y
                    best = delta
            if x < 0:
                d[i] = 0.0
                moves.append((i, -1, 1))
                continue
            if counts[i] < lo[i]:
                counts[assign[x]] -= 1
                assign[x] = i
                counts[i] += 1
                bids[x] = d[i]
                if counts[i] == lo[i] and best >= 0.0:
                    d[i] -= best + eps
                moves.append((i, x, 0))
            elif best + eps >= d[i]:
                d[i] = 0.0
                moves.append((i, x, 1))
            else:
                counts[assign[x]] -= 1
                assign[x] = i
                counts[i] += 1
                bids[x] = d[i]
                if counts[i] == hi[i] and best >= 0.0:
                    d[i] -= best + eps
                moves.append((i, x, 2))
    return events, moves


def outside_sums(const long long[::1] indptr, const long long[::1] indices,
                 const double[::1] weights, const long long[::1] labels,
                 const long long[::1] rows, Py_ssize_t K):
    cdef Py_ssize_t m = rows.shape[0], r, x, i
    cdef long long e, ly
    cdef double w
    out_arr = np.zeros((m, K), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for r in range(m):
            x = rows[r]
            for e in range(indptr[x], indptr[x + 1]):
                ly = labels[indices[e]]
                w = weights[e]
                for i in range(K):
                    if i != ly:
                        out[r, i] += w
    return out_arr


def cut_weight(const long long[::1] indptr, const long long[::1] indices,
               const double[::1] weights, const long long[::1] labels):
    cdef Py_ssize_t n = indptr.shape[0] - 1, x
    cdef long long e, lx
    cdef double total = 0.0
    with nogil:
        for x in range(n):
            lx = labels[x]
            for e in range(indptr[x], indptr[x + 1]):
                if labels[indices[e]] != lx:
                    total += weights[e]
    return total
