"""
Similarity graphs
=================

Exact k-nearest-neighbor search and the symmetric sparse weight matrix
used by the classifier.  Two kernels are available:

* ``gaussian``: ``exp(-d^2 / sigma^2)`` with a global ``sigma``, or the
  self-tuning form ``exp(-d^2 / (sigma_i sigma_j))`` where ``sigma_i`` is
  the distance from point ``i`` to its ``M``-th neighbor (default
  ``M = ceil(k/2)``).
* ``cosine``: angular distance ``arccos(<x,y>/(|x||y|))`` with the
  self-tuning local scale (default ``M = k``).

Directed kNN weights are symmetrized as ``(W + W^T)/2``.

```py
import numpy as np
from malady.graph import KernelSpec, build_graph

X = np.random.default_rng(0).normal(size=(500, 2))
G = build_graph(X, KernelSpec("gaussian", k_neighbors=10))
print(G.n, G.nnz, G.degree[:5])
```
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.spatial.distance import cdist

from .errors import InvalidParameterError

SIGMA_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class SparseGraph:
    """Symmetric weighted graph in CSR form, columns sorted per row."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    degree: np.ndarray = field(init=False)

    def __post_init__(self):
        indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if indptr.shape != (self.n + 1,) or indptr[-1] != len(indices):
            raise InvalidParameterError("inconsistent CSR structure")
        if len(weights) != len(indices):
            raise InvalidParameterError("weights and indices differ in length")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise InvalidParameterError("weights must be finite and nonnegative")
        rows = np.repeat(np.arange(self.n), np.diff(indptr))
        deg = np.bincount(rows, weights=weights, minlength=self.n)
        for name, val in (("indptr", indptr), ("indices", indices), ("weights", weights)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        deg = np.asarray(deg, dtype=np.float64)
        deg.setflags(write=False)
        object.__setattr__(self, "degree", deg)

    @classmethod
    def from_scipy(cls, W):
        W = sparse.csr_matrix(W, dtype=np.float64)
        if W.shape[0] != W.shape[1]:
            raise InvalidParameterError("weight matrix must be square")
        W.sum_duplicates()
        W.sort_indices()
        if (abs(W - W.T) > 0).nnz:
            raise InvalidParameterError("weight matrix must be symmetric")
        return cls(W.shape[0], W.indptr, W.indices, W.data)

    @classmethod
    def from_dense(cls, W):
        """Graph from a dense symmetric matrix.

        Nonzero diagonal entries are kept as self-loops; ``build_graph``
        never produces them, but energy checks on positive semi-definite
        matrices need them.
        """
        W = np.asarray(W, dtype=np.float64)
        return cls.from_scipy(sparse.csr_matrix(W))

    def to_scipy(self):
        return sparse.csr_matrix((self.weights, self.indices, self.indptr),
                                 shape=(self.n, self.n))

    def to_dense(self):
        return self.to_scipy().toarray()

    @property
    def nnz(self):
        return len(self.indices)

    def neighbors(self, i):
        """Column indices and weights of row ``i``."""
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    def write_edge_list(self, path):
        """Write ``i,j,w`` rows, one per stored entry."""
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        with open(path, "w") as f:
            f.write("i,j,w\n")
            for i, j, w in zip(rows.tolist(), self.indices.tolist(), self.weights.tolist()):
                f.write(f"{i},{j},{w!r}\n")


@dataclass(frozen=True)
class KernelSpec:
    """Weight function parameters.

    ``sigma`` selects a global Gaussian scale; otherwise ``local_rank``
    (or its default) gives the rank of the neighbor that sets each point's
    local scale.
    """

    kind: str = "gaussian"
    k_neighbors: int = 10
    sigma: float | None = None
    local_rank: int | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "cosine"):
            raise InvalidParameterError(f"unknown kernel {self.kind!r}")
        if self.k_neighbors < 1:
            raise InvalidParameterError("k_neighbors must be >= 1")
        if self.sigma is not None:
            if self.kind != "gaussian":
                raise InvalidParameterError("a global sigma applies to the gaussian kernel only")
            if not self.sigma > 0:
                raise InvalidParameterError("sigma must be positive")
        if self.local_rank is not None and not 1 <= self.local_rank <= self.k_neighbors:
            raise InvalidParameterError("local_rank must lie in [1, k_neighbors]")

    @property
    def metric(self):
        return "euclidean" if self.kind == "gaussian" else "angular"

    @property
    def rank(self):
        if self.local_rank is not None:
            return self.local_rank
        if self.kind == "gaussian":
            return math.ceil(self.k_neighbors / 2)
        return self.k_neighbors


def _check_features(X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise InvalidParameterError("features must be a nonempty N x d matrix")
    if not np.all(np.isfinite(X)):
        raise InvalidParameterError("features must be finite")
    return X


def _pairwise(A, X, metric):
    if metric == "euclidean":
        return cdist(A, X, "euclidean")
    c = 1.0 - cdist(A, X, "cosine")
    return np.arccos(np.clip(c, -1.0, 1.0))


def knn_search(features, k, metric="euclidean", block_size=None):
    """Exact k nearest neighbors of every point, excluding the point itself.

    Parameters
    ----------
    features : (N, d) array
    k : int
        Number of neighbors, ``1 <= k < N``.
    metric : {"euclidean", "angular"}
        Angular distance is the angle between feature vectors.

    Returns
    -------
    indices : (N, k) int64 array
        Neighbor indices, ascending by distance (ties by index).
    distances : (N, k) float64 array
    """
    X = _check_features(features)
    N = X.shape[0]
    if not 1 <= k < N:
        raise InvalidParameterError(f"k must satisfy 1 <= k < N (k={k}, N={N})")
    if metric not in ("euclidean", "angular"):
        raise InvalidParameterError(f"unknown metric {metric!r}")
    if metric == "angular" and np.any(np.linalg.norm(X, axis=1) == 0):
        raise InvalidParameterError("angular distance is undefined for zero vectors")
    if block_size is None:
        block_size = max(1, min(N, 4_000_000 // N))
    idx = np.empty((N, k), dtype=np.int64)
    dist = np.empty((N, k))
    for start in range(0, N, block_size):
        stop = min(N, start + block_size)
        D = _pairwise(X[start:stop], X, metric)
        rows = np.arange(stop - start)
        D[rows, rows + start] = np.inf
        part = np.argpartition(D, k - 1, axis=1)[:, :k]
        cutoff = D[rows[:, None], part].max(axis=1)
        for r in rows:
            cand = np.flatnonzero(D[r] <= cutoff[r])
            order = np.lexsort((cand, D[r, cand]))[:k]
            idx[start + r] = cand[order]
            dist[start + r] = D[r, cand[order]]
    return idx, dist


def gaussian_weight(dist, sigma):
    """``exp(-dist^2 / sigma^2)``."""
    if not sigma > 0:
        raise InvalidParameterError("sigma must be positive")
    dist = np.asarray(dist, dtype=np.float64)
    return np.exp(-(dist ** 2) / sigma ** 2)


def angular_distance(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        raise InvalidParameterError("angular distance is undefined for zero vectors")
    return float(np.arccos(np.clip(np.dot(x, y) / (nx * ny), -1.0, 1.0)))


def cosine_local_weight(xi, xj, sigma_i, sigma_j):
    """Cosine-similarity kernel with local scales.

    Scales below ``SIGMA_FLOOR`` are clamped to it.
    """
    if sigma_i < 0 or sigma_j < 0:
        raise InvalidParameterError("local scales must be nonnegative")
    theta = angular_distance(xi, xj)
    s = max(sigma_i, SIGMA_FLOOR) * max(sigma_j, SIGMA_FLOOR)
    return math.exp(-theta ** 2 / s)


def build_graph(features, spec):
    """Symmetric kNN similarity graph.

    Parameters
    ----------
    features : (N, d) array
    spec : KernelSpec

    Returns
    -------
    SparseGraph
    """
    X = _check_features(features)
    k = spec.k_neighbors
    idx, dist = knn_search(X, k, spec.metric)
    N = X.shape[0]
    if spec.sigma is not None:
        W_dir = np.exp(-(dist ** 2) / spec.sigma ** 2)
    else:
        scale = np.maximum(dist[:, spec.rank - 1], SIGMA_FLOOR)
        W_dir = np.exp(-(dist ** 2) / (scale[:, None] * scale[idx]))
    rows = np.repeat(np.arange(N), k)
    W = sparse.csr_matrix((W_dir.ravel(), (rows, idx.ravel())), shape=(N, N))
    W = (W + W.T) * 0.5
    W.eliminate_zeros()
    W.sort_indices()
    return SparseGraph(N, W.indptr, W.indices, W.data)
