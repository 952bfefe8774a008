"""
Sequential active learning
==========================

The acquisition score of an unlabeled point is ``A(x) = 1 - M(x)`` where
the margin ``M(x)`` is the gap between the best and second-best deal
``a_i(x) - p_i + t_i`` offered to ``x`` by the final auction of the
classifier.  Small margins flag points on contested class boundaries.

``malady_loop`` queries the arg-max of ``A`` one point at a time;
``random_loop`` is the same pipeline with uniformly drawn queries.
"""
import time
from dataclasses import dataclass, field

import numpy as np

from .dynamics import LabeledData, ssl_classify
from .errors import InvalidParameterError


@dataclass(eq=False)
class AcquisitionScores:
    """Scores, margins and the chosen point, aligned with ``indices``."""

    indices: np.ndarray
    scores: np.ndarray
    margins: np.ndarray
    best: int


@dataclass(frozen=True)
class ALBudget:
    """Initial labels per class and the final labeled-set size."""

    initial_per_class: int = 5
    total: int = 150

    def __post_init__(self):
        if self.initial_per_class < 1:
            raise InvalidParameterError("initial_per_class must be >= 1")


@dataclass(eq=False)
class RunRecord:
    """Accuracy trace of one active-learning run.

    ``rows`` holds ``(iteration, num_labeled, query_index, accuracy)``;
    the last row has ``query_index == -1``.  ``exhausted`` marks a final
    evaluation over an empty unlabeled set (accuracy reported as 1.0).
    """

    seed: int
    acquisition: str
    rows: list = field(default_factory=list)
    queries: list = field(default_factory=list)
    final_accuracy: float = float("nan")
    exhausted: bool = False
    wall_time: float = 0.0
    config_hash: str = ""

    @property
    def curve(self):
        return [(r[1], r[3]) for r in self.rows]


def margin(a_row, p, t, eps=0.0):
    """Best-minus-second deal of one point.

    Returns ``(M, v, w)`` with ``v`` and ``w`` the best and second-best
    values of ``a_i - p_i + t_i + eps``.  The gap is taken before adding
    ``eps`` so ``M`` does not depend on it.
    """
    base = np.asarray(a_row, dtype=np.float64) - np.asarray(p, dtype=np.float64) \
        + np.asarray(t, dtype=np.float64)
    if base.ndim != 1 or len(base) < 2:
        raise InvalidParameterError("at least two classes are required")
    i_star = int(np.argmax(base))
    rest = base.copy()
    rest[i_star] = -np.inf
    i_next = int(np.argmax(rest))
    return float(base[i_star] - base[i_next]), float(base[i_star] + eps), \
        float(base[i_next] + eps)


def margins(a, p, t):
    """Row-wise margins of a coefficient matrix."""
    base = np.asarray(a, dtype=np.float64) - p + t
    top = np.partition(base, -2, axis=1)
    return top[:, -1] - top[:, -2]


def score_all(ssl_result, unlabeled=None):
    """Acquisition scores of the unlabeled points of a classifier run.

    ``unlabeled`` defaults to the run's own unlabeled set; a subset
    restricts the candidates.
    """
    idx = ssl_result.unlabeled
    a = ssl_result.coefficients
    if unlabeled is not None:
        unlabeled = np.asarray(unlabeled, dtype=np.int64)
        pos = np.searchsorted(idx, unlabeled)
        if np.any(pos >= len(idx)) or np.any(idx[np.minimum(pos, len(idx) - 1)] != unlabeled):
            raise InvalidParameterError("candidates must be unlabeled in the classifier run")
        idx, a = unlabeled, a[pos]
    if len(idx) == 0:
        raise InvalidParameterError("no unlabeled points to score")
    M = margins(a, ssl_result.p, ssl_result.t)
    best = int(np.argmin(M))
    return AcquisitionScores(idx, 1.0 - M, M, int(idx[best]))


def accuracy(predicted, truth, indices):
    """Fraction of ``indices`` where prediction matches truth; 1.0 when empty."""
    indices = np.asarray(indices, dtype=np.int64)
    if len(indices) == 0:
        return 1.0
    return float(np.mean(np.asarray(predicted)[indices] == np.asarray(truth)[indices]))


def initial_labeled_set(labels, per_class, rng):
    """``per_class`` distinct points of each class, drawn uniformly."""
    labels = np.asarray(labels)
    K = int(labels.max()) + 1
    picks = []
    for c in range(K):
        pool = np.flatnonzero(labels == c)
        if len(pool) < per_class:
            raise InvalidParameterError(f"class {c} has fewer than {per_class} points")
        picks.append(np.sort(rng.choice(pool, per_class, replace=False)))
    return np.concatenate(picks)


def _run(graph, oracle, budget, bounds_spec, concave_spec, schedule, steps, seed,
         acquisition, init):
    start = time.perf_counter()
    oracle = np.asarray(oracle, dtype=np.int64)
    N = graph.n
    if len(oracle) != N:
        raise InvalidParameterError("oracle must label every point")
    K = int(oracle.max()) + 1
    if budget.total > N:
        raise InvalidParameterError(f"budget {budget.total} exceeds {N} points")
    labeled = list(initial_labeled_set(oracle, budget.initial_per_class,
                                       np.random.default_rng([seed, 0])).tolist())
    if budget.total < len(labeled):
        raise InvalidParameterError(
            f"budget {budget.total} is below the initial labeled set size {len(labeled)}")
    query_rng = np.random.default_rng([seed, 1])
    record = RunRecord(seed, acquisition)
    iteration = 0
    while True:
        data = LabeledData(labeled, oracle[labeled], K)
        res = ssl_classify(graph, data, bounds_spec, concave_spec, schedule, steps,
                           seed=[seed, 2, iteration], init=init)
        acc = accuracy(res.partition.assignment, oracle, res.unlabeled)
        if len(labeled) >= budget.total:
            record.rows.append((iteration, len(labeled), -1, acc))
            record.final_accuracy = acc
            record.exhausted = len(res.unlabeled) == 0
            break
        if acquisition == "malady":
            query = score_all(res).best
        else:
            query = int(query_rng.choice(res.unlabeled))
        record.rows.append((iteration, len(labeled), query, acc))
        record.queries.append(query)
        labeled.append(query)
        iteration += 1
    record.wall_time = time.perf_counter() - start
    return record


def malady_loop(graph, oracle, budget, bounds_spec, concave_spec=None, schedule=None,
                steps=100, seed=0, init="geodesic"):
    """Query the highest-scoring point until ``budget.total`` labels are held.

    Every classifier run is evaluated on its unlabeled set, so the record
    has one accuracy per labeled-set size from the initial set up to the
    budget.
    """
    return _run(graph, oracle, budget, bounds_spec, concave_spec, schedule, steps, seed,
                "malady", init)


def random_loop(graph, oracle, budget, bounds_spec, concave_spec=None, schedule=None,
                steps=100, seed=0, init="geodesic"):
    """``malady_loop`` with queries drawn uniformly from the unlabeled set."""
    return _run(graph, oracle, budget, bounds_spec, concave_spec, schedule, steps, seed,
                "random", init)
