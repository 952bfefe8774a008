"""
Auction dynamics classifier
===========================

Semi-supervised classification on a similarity graph.  Each scheme step
linearizes the graph heat content (plus an optional concave term) around
the current partition and solves the resulting class-size constrained
assignment problem over the unlabeled points with :func:`scaled_auction`.

```py
from malady.auction import AuctionSchedule
from malady.dynamics import ClassBoundsSpec, LabeledData, ssl_classify

labeled = LabeledData(train_ind, train_labels, n_classes=10)
res = ssl_classify(G, labeled, ClassBoundsSpec("exact", sizes=class_sizes),
                   steps=100, seed=0)
pred = res.partition.assignment
```
"""
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse.csgraph import dijkstra

from . import _kernels
from .auction import AuctionSchedule, Bounds, Partition, scaled_auction
from .errors import InfeasibleError, InvalidParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LabeledData:
    """Indices of labeled points and their classes."""

    indices: np.ndarray
    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).copy()
        lab = np.asarray(self.labels, dtype=np.int64).copy()
        if idx.shape != lab.shape or idx.ndim != 1:
            raise InvalidParameterError("indices and labels must be matching vectors")
        if len(np.unique(idx)) != len(idx):
            raise InvalidParameterError("labeled indices must be distinct")
        if self.n_classes < 2:
            raise InvalidParameterError("at least two classes are required")
        if len(lab) and (lab.min() < 0 or lab.max() >= self.n_classes):
            raise InvalidParameterError("labels must lie in [0, n_classes)")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "labels", lab)

    def counts(self):
        return np.bincount(self.labels, minlength=self.n_classes)

    def unlabeled(self, n):
        mask = np.ones(n, dtype=bool)
        mask[self.indices] = False
        return np.flatnonzero(mask)


@dataclass(frozen=True)
class ClassBoundsSpec:
    """How class-size bounds are set.

    ``exact`` pins every class to its true size, ``flexible`` widens the
    true size by the fraction ``slack`` and ``none`` leaves sizes free.
    Sizes count all points, labeled included.
    """

    mode: str = "exact"
    sizes: tuple | None = None
    slack: float = 0.0

    def __post_init__(self):
        if self.mode not in ("exact", "flexible", "none"):
            raise InvalidParameterError(f"unknown bounds mode {self.mode!r}")
        if self.mode != "none" and self.sizes is None:
            raise InvalidParameterError(f"mode {self.mode!r} needs true class sizes")
        if not 0 <= self.slack <= 1:
            raise InvalidParameterError("slack must lie in [0, 1]")
        if self.sizes is not None:
            object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))


@dataclass(frozen=True, eq=False)
class ConcaveTermSpec:
    """Extra concave energy: ``none``, ``poisson`` (weight ``gamma``) or
    ``linear`` with a per-point per-class cost matrix ``R``."""

    kind: str = "none"
    gamma: float = 1.0
    R: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("none", "poisson", "linear"):
            raise InvalidParameterError(f"unknown concave term {self.kind!r}")
        if self.kind == "poisson" and not self.gamma > 0:
            raise InvalidParameterError("poisson term needs gamma > 0")
        if self.kind == "linear":
            if self.R is None or not np.all(np.isfinite(self.R)):
                raise InvalidParameterError("linear term needs a finite matrix R")


@dataclass(eq=False)
class SSLResult:
    """Final partition over all points, duals and last coefficients.

    ``coefficients`` has one row per entry of ``unlabeled``.
    """

    partition: Partition
    p: np.ndarray
    t: np.ndarray
    coefficients: np.ndarray
    unlabeled: np.ndarray
    bounds: Bounds
    energy: list = field(default_factory=list)
    eps_final: float | None = None


def derive_unlabeled_bounds(spec, labeled, n_unlabeled, n_classes):
    """Bounds on the unlabeled member count of each class."""
    K = n_classes
    if spec.mode == "none":
        bounds = Bounds.unconstrained(K, n_unlabeled)
    else:
        sizes = np.asarray(spec.sizes, dtype=np.int64)
        if sizes.shape != (K,):
            raise InvalidParameterError("one true size per class is required")
        rest = sizes - labeled.counts()
        if np.any(rest < 0):
            raise InfeasibleError("a class has more labeled points than its true size")
        if spec.mode == "exact":
            bounds = Bounds.exact(rest)
        else:
            s = Fraction(str(spec.slack))
            lo = [math.floor((1 - s) * int(r)) for r in rest]
            hi = [min(math.ceil((1 + s) * int(r)), n_unlabeled) for r in rest]
            bounds = Bounds(np.clip(lo, 0, n_unlabeled), hi)
    bounds.check_feasible(n_unlabeled)
    return bounds


def initial_partition(graph, labeled, bounds, seed, method="random", schedule=None):
    """Feasible starting partition; labeled points sit at their labels.

    ``random``: each class first receives ``B_i`` random unlabeled points,
    the rest are spread uniformly over the remaining ``U_i - B_i`` slots.

    ``geodesic``: each unlabeled point prefers the class of its nearest
    labeled point along the graph (edge length ``-log w``); one scaled
    auction on the negated distances makes the result respect the bounds.
    Its eps scaling starts no finer than 1e-3.
    Ignores ``seed``.
    """
    N = graph.n
    K = labeled.n_classes
    unl = labeled.unlabeled(N)
    bounds.check_feasible(len(unl))
    if method == "geodesic":
        return _geodesic_partition(graph, labeled, bounds, unl, schedule)
    if method != "random":
        raise InvalidParameterError(f"unknown initialization {method!r}")
    rng = np.random.default_rng(seed)
    slots = np.repeat(np.arange(K), bounds.lower)
    extra = len(unl) - len(slots)
    if extra:
        pool = np.repeat(np.arange(K), np.minimum(bounds.upper, len(unl)) - bounds.lower)
        slots = np.concatenate([slots, rng.choice(pool, extra, replace=False)])
    assign = np.empty(N, dtype=np.int64)
    assign[labeled.indices] = labeled.labels
    assign[unl] = slots[rng.permutation(len(unl))]
    return Partition.from_labels(assign, K)


def _geodesic_partition(graph, labeled, bounds, unl, schedule):
    N, K = graph.n, labeled.n_classes
    assign = np.empty(N, dtype=np.int64)
    assign[labeled.indices] = labeled.labels
    if len(unl) == 0:
        return Partition.from_labels(assign, K)
    W = graph.to_scipy()
    W.data = np.maximum(-np.log(np.maximum(W.data, 1e-300)), 1e-12)
    dist = np.full((len(unl), K), np.inf)
    for c in range(K):
        src = labeled.indices[labeled.labels == c]
        if len(src):
            dist[:, c] = dijkstra(W, directed=False, indices=src, min_only=True)[unl]
    finite = np.isfinite(dist)
    far = 2.0 * dist[finite].max() + 1.0 if finite.any() else 1.0
    dist[~finite] = far
    # costs lie in [-1, 0), so scaling can start coarse; a 1e-7 start stalls
    schedule = schedule or AuctionSchedule()
    coarse = AuctionSchedule(max(schedule.epsilon0, 1e-3), schedule.epsilon_min, schedule.alpha)
    res = scaled_auction(-dist / far, bounds, coarse, N)
    assign[unl] = res.partition.assignment
    return Partition.from_labels(assign, K)


def concave_gradient(spec, labeled, n_classes, n_points):
    """Gradient of the concave term, one row per point."""
    K, N = n_classes, n_points
    if spec.kind == "linear":
        R = np.asarray(spec.R, dtype=np.float64)
        if R.shape != (N, K):
            raise InvalidParameterError(f"R must be {N} x {K}")
        return R.copy()
    grad = np.zeros((N, K))
    if spec.kind == "poisson" and len(labeled.indices):
        onehot = np.eye(K)[labeled.labels]
        grad[labeled.indices] = -spec.gamma * (onehot - onehot.mean(axis=0))
    return grad


def assignment_coefficients(graph, partition, grad, unlabeled):
    """``a_i(x) = 1 - grad_i(x) - sum of w(x, y) over y outside class i``.

    One sparse row scan per unlabeled point.
    """
    rows = np.ascontiguousarray(unlabeled, dtype=np.int64)
    outside = _kernels.outside_sums(graph.indptr, graph.indices, graph.weights,
                                    np.ascontiguousarray(partition.assignment, dtype=np.int64),
                                    rows, partition.n_classes)
    return 1.0 - grad[rows] - outside


def ghc_energy(graph, partition):
    """Graph heat content of a hard partition (twice the weighted cut)."""
    return _kernels.cut_weight(graph.indptr, graph.indices, graph.weights,
                               np.ascontiguousarray(partition.assignment, dtype=np.int64))


def concave_energy(grad, partition):
    """Value of a linear concave term with the given gradient."""
    return float(grad[np.arange(len(partition)), partition.assignment].sum())


def ssl_classify(graph, labeled, bounds_spec, concave_spec=None, schedule=None,
                 steps=100, seed=0, init="geodesic", dt=None, verbose=False):
    """Run up to ``steps`` auction dynamics steps from ``initial_partition``.

    Stops early once a step leaves the partition unchanged.  ``dt`` is
    accepted for interface completeness and has no effect.

    Returns
    -------
    SSLResult
        ``energy`` holds the heat content plus concave term after each
        executed step.
    """
    del dt
    concave_spec = concave_spec or ConcaveTermSpec()
    schedule = schedule or AuctionSchedule()
    if steps < 0:
        raise InvalidParameterError("steps must be nonnegative")
    N = graph.n
    K = labeled.n_classes
    if len(labeled.indices) and labeled.indices.max() >= N:
        raise InvalidParameterError("labeled index outside the graph")
    unl = labeled.unlabeled(N)
    bounds = derive_unlabeled_bounds(bounds_spec, labeled, len(unl), K)
    partition = initial_partition(graph, labeled, bounds, seed, init, schedule)
    grad = concave_gradient(concave_spec, labeled, K, N)
    p = np.zeros(K)
    t = np.zeros(K)
    eps_final = None
    energy = []
    a = assignment_coefficients(graph, partition, grad, unl)
    for step in range(steps):
        if step:
            a = assignment_coefficients(graph, partition, grad, unl)
        res = scaled_auction(a, bounds, schedule, N)
        new = partition.assignment.copy()
        new[unl] = res.partition.assignment
        changed = int(np.count_nonzero(new != partition.assignment))
        partition = Partition(new, np.zeros(N), K)
        partition.bids[unl] = res.partition.bids
        p, t, eps_final = res.p, res.t, res.eps
        e = ghc_energy(graph, partition) + concave_energy(grad, partition)
        energy.append(e)
        if verbose:
            logger.info(json.dumps({"step": step, "energy": e, "changed_points": changed,
                                    "rounds_of_epsilon": res.rounds}))
        if changed == 0:
            break
    return SSLResult(partition, p, t, a, unl, bounds, energy, eps_final)
