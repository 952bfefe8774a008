"""Brute-force references for tests: enumeration and dense re-summation."""
import numpy as np

from .errors import InvalidParameterError

ENUMERATION_BUDGET = 1_000_000


def brute_force_assignment(a, lower, upper, budget=ENUMERATION_BUDGET):
    """Best bounded assignment by exhaustive enumeration.

    Enumerates assignments in lexicographic order, pruning branches whose
    class counts already exceed ``upper`` or can no longer reach
    ``lower``.  Returns ``(value, assignment)``; on ties the
    lexicographically first optimal assignment wins.  Raises
    ``InvalidParameterError`` when ``K**n`` exceeds ``budget``.
    """
    a = np.asarray(a, dtype=np.float64)
    n, K = a.shape
    lower = [int(v) for v in lower]
    upper = [int(v) for v in upper]
    if K ** n > budget:
        raise InvalidParameterError(f"{K}**{n} assignments exceed the budget {budget}")
    rows = a.tolist()
    counts = [0] * K
    current = [0] * n
    best = [-np.inf, None]

    def deficit():
        return sum(max(lower[i] - counts[i], 0) for i in range(K))

    def visit(x, value):
        if deficit() > n - x:
            return
        if x == n:
            if value > best[0]:
                best[0] = value
                best[1] = list(current)
            return
        for i in range(K):
            if counts[i] == upper[i]:
                continue
            counts[i] += 1
            current[x] = i
            visit(x + 1, value + rows[x][i])
            counts[i] -= 1

    visit(0, 0.0)
    if best[1] is None:
        return -np.inf, None
    return best[0], np.asarray(best[1], dtype=np.int64)


def dense_coefficients(W, labels, grad):
    """Assignment coefficients of every point by a direct double loop.

    ``a[x, i] = 1 - grad[x, i] - sum(W[x, y] for y with labels[y] != i)``.
    """
    W = np.asarray(W, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    N, K = grad.shape
    out = np.empty((N, K))
    for x in range(N):
        for i in range(K):
            s = 0.0
            for y in range(N):
                if labels[y] != i:
                    s += W[x, y]
            out[x, i] = 1.0 - grad[x, i] - s
    return out


def dense_ghc(W, labels):
    """Graph heat content of a hard partition, summed over all ordered pairs."""
    W = np.asarray(W, dtype=np.float64)
    labels = np.asarray(labels)
    return float(W[labels[:, None] != labels[None, :]].sum())
