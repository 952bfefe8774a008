"""Pure-Python reference kernels.

Each function mirrors one routine in ``_ckernels.pyx`` operation for
operation, so both backends return bit-identical arrays.  Inputs are
assumed validated by the public wrappers in :mod:`malady.auction` and
:mod:`malady.dynamics`.
"""
import heapq

import numpy as np

from ..errors import ConvergenceError


def _best_two(row, d, avail):
    """Best and second-best class of ``row - d`` over available classes.

    Returns ``(i_star, i_next)``; ``i_next`` is -1 when only one class is
    available.  Ties go to the lowest class index.
    """
    i_star = -1
    i_next = -1
    v_star = 0.0
    v_next = 0.0
    for i in range(len(row)):
        if not avail[i]:
            continue
        v = row[i] - d[i]
        if i_star < 0 or v > v_star:
            i_next, v_next = i_star, v_star
            i_star, v_star = i, v
        elif i_next < 0 or v > v_next:
            i_next, v_next = i, v
    return i_star, i_next


def _bid(row, d, i_star, i_next, eps):
    v = row[i_star] - d[i_star]
    w = row[i_next] - d[i_next] if i_next >= 0 else v
    return d[i_star] + eps + (v - w)


def membership_auction(eps, volumes, a, p0, max_events):
    n, K = a.shape
    rows = a.tolist()
    cap = [int(v) for v in volumes]
    avail = [c > 0 for c in cap]
    p = [float(x) for x in p0]
    assign = [-1] * n
    bids = [0.0] * n
    heaps = [[] for _ in range(K)]
    events = 0
    pending = list(range(n))
    while pending:
        evicted = []
        for x in pending:
            events += 1
            if events > max_events:
                raise ConvergenceError(
                    f"membership auction exceeded {max_events} bidding events")
            row = rows[x]
            i_star, i_next = _best_two(row, p, avail)
            b = _bid(row, p, i_star, i_next, eps)
            heap = heaps[i_star]
            bids[x] = b
            assign[x] = i_star
            if len(heap) == cap[i_star]:
                _, y = heapq.heapreplace(heap, (b, x))
                assign[y] = -1
                evicted.append(y)
                p[i_star] = heap[0][0]
            else:
                heapq.heappush(heap, (b, x))
                if len(heap) == cap[i_star]:
                    p[i_star] = heap[0][0]
        evicted.sort()
        pending = evicted
    return (np.asarray(assign, dtype=np.int64), np.asarray(bids),
            np.asarray(p), events)


def upper_bound_auction(eps, lower, upper, a, d0, max_events):
    n, K = a.shape
    rows = a.tolist()
    lo = [int(v) for v in lower]
    cap = [min(int(v), n) for v in upper]
    avail = [c > 0 for c in cap]
    d = [float(x) for x in d0]
    assign = [-1] * n
    bids = [0.0] * n
    heaps = [[] for _ in range(K)]
    events = 0
    pending = list(range(n))
    while pending:
        evicted = []
        for x in pending:
            events += 1
            if events > max_events:
                raise ConvergenceError(
                    f"upper bound auction exceeded {max_events} bidding events")
            row = rows[x]
            i_star, i_next = _best_two(row, d, avail)
            b = _bid(row, d, i_star, i_next, eps)
            heap = heaps[i_star]
            bids[x] = b
            assign[x] = i_star
            size = len(heap)
            if size == cap[i_star]:
                _, y = heapq.heapreplace(heap, (b, x))
                assign[y] = -1
                evicted.append(y)
                d[i_star] = heap[0][0]
            elif size == lo[i_star] and d[i_star] < 0.0 and size > 0:
                _, y = heapq.heapreplace(heap, (b, x))
                assign[y] = -1
                evicted.append(y)
                m = heap[0][0]
                d[i_star] = m if m < 0.0 else 0.0
            else:
                heapq.heappush(heap, (b, x))
        evicted.sort()
        pending = evicted
    return (np.asarray(assign, dtype=np.int64), np.asarray(bids),
            np.asarray(d), events)


def _deficient(i, counts, lo, hi, d):
    return (counts[i] < hi[i] and d[i] > 0.0) or counts[i] < lo[i]


def lower_bound_pass(eps, lower, upper, a, d, assign, bids, counts, max_events):
    """One sweep over the classes, repairing each until it is not deficient.

    Mutates ``d``, ``assign``, ``bids`` and ``counts`` in place.  Returns
    the event count and the moves as ``(class, element, branch)`` with
    branch 0 (lower-bound move), 1 (price reset) or 2 (upper-side move).
    """
    n, K = a.shape
    rows = a.tolist()
    lo = [int(v) for v in lower]
    hi = [int(v) for v in upper]
    dl = d.tolist()
    al = assign.tolist()
    cl = counts.tolist()
    moves = []
    events = 0
    for i in range(K):
        while _deficient(i, cl, lo, hi, dl):
            events += 1
            if events > max_events:
                raise ConvergenceError(f"lower bound auction exceeded {max_events} events")
            x = -1
            best = 0.0
            di = dl[i]
            for y in range(n):
                j = al[y]
                if j == i:
                    continue
                row = rows[y]
                delta = (row[j] - dl[j]) - (row[i] - di)
                if x < 0 or delta < best:
                    x, best = y, delta
            if x < 0:
                # every element already sits in class i
                dl[i] = 0.0
                moves.append((i, -1, 1))
                continue
            if cl[i] < lo[i]:
                cl[al[x]] -= 1
                al[x] = i
                cl[i] += 1
                bids[x] = dl[i]
                if cl[i] == lo[i] and best >= 0.0:
                    dl[i] -= best + eps
                moves.append((i, x, 0))
            elif best + eps >= dl[i]:
                dl[i] = 0.0
                moves.append((i, x, 1))
            else:
                cl[al[x]] -= 1
                al[x] = i
                cl[i] += 1
                bids[x] = dl[i]
                if cl[i] == hi[i] and best >= 0.0:
                    dl[i] -= best + eps
                moves.append((i, x, 2))
    d[:] = dl
    assign[:] = al
    counts[:] = cl
    return events, moves


def outside_sums(indptr, indices, weights, labels, rows, K):
    """Per row and class, the weight to neighbors outside that class.

    Summed in column order so the result matches a dense row scan bit for bit.
    """
    out = np.zeros((len(rows), K))
    for r, x in enumerate(rows):
        lo, hi = indptr[x], indptr[x + 1]
        w, lab = weights[lo:hi], labels[indices[lo:hi]]
        for i in range(K):
            picked = w[lab != i]
            if len(picked):
                # cumsum adds left to right, unlike the pairwise np.sum
                out[r, i] = np.cumsum(picked)[-1]
    return out


def cut_weight(indptr, indices, weights, labels):
    total = 0.0
    for x in range(len(indptr) - 1):
        lx = labels[x]
        for e in range(indptr[x], indptr[x + 1]):
            if labels[indices[e]] != lx:
                total += weights[e]
    return total
