"""
Oracle-backed property checks
=============================

Each ``check_*`` function draws a seeded batch of small random instances,
compares the solvers against brute-force or dense references and returns
a :class:`CheckResult`.  ``malady verify`` runs :func:`run_all`; the
acceptance tests call the same functions.
"""
import time
from dataclasses import dataclass, field

import numpy as np

from .active import margin, margins
from .auction import (AuctionSchedule, Bounds, lower_bound_auction, membership_auction,
                      total_benefit, upper_bound_auction, check_eps_cs)
from .dynamics import (ClassBoundsSpec, ConcaveTermSpec, LabeledData, assignment_coefficients,
                       concave_gradient, ghc_energy, initial_partition,
                       derive_unlabeled_bounds, ssl_classify)
from .graph import SparseGraph
from .oracle import brute_force_assignment, dense_coefficients
from .auction import Partition


@dataclass
class CheckResult:
    name: str
    trials: int
    violations: int
    seconds: float
    worst: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return self.violations == 0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: {self.trials} trials, {self.violations} violations, "
                f"worst {self.worst:.3g}, {self.seconds:.2f}s")


class _DualLog:
    """Collects every auction return for the dual consistency check."""

    def __init__(self):
        self.results = []

    def add(self, res):
        self.results.append(res)
        return res


def dual_violation(res):
    """True unless ``p * t == 0`` and ``d == p - t`` hold bitwise."""
    return bool(np.any(res.p * res.t != 0) or np.any(res.d != res.p - res.t))


def random_volumes(rng, n, K):
    cuts = np.sort(rng.integers(0, n + 1, K - 1))
    return np.diff(np.concatenate([[0], cuts, [n]]))


def random_bounds(rng, n, K):
    """Bounds with ``B_i < U_i`` for every class.

    About a third of the draws are tight (``sum B == n``); zero lower
    bounds are common.
    """
    if rng.random() < 1 / 3:
        lower = random_volumes(rng, n, K)
    else:
        lower = random_volumes(rng, int(rng.integers(0, n)), K)
    upper = lower + 1 + rng.integers(0, n, K)
    while upper.sum() < n:
        upper[rng.integers(K)] += 1
    return Bounds(lower, upper)


def check_membership(trials=200, eps=1e-6, seed=0, log=None):
    """Membership auction within ``n*eps`` of the enumerated optimum."""
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    bad, worst = 0, -np.inf
    for _ in range(trials):
        n, K = int(rng.integers(4, 10)), int(rng.integers(2, 4))
        a = rng.random((n, K))
        vol = random_volumes(rng, n, K)
        res = membership_auction(eps, vol, a)
        if log:
            log.add(res)
        opt, _ = brute_force_assignment(a, vol, vol)
        gap = opt - total_benefit(res.partition, a)
        worst = max(worst, gap)
        if gap > n * eps or np.any(res.partition.counts != vol):
            bad += 1
    return CheckResult("membership near-optimality", trials, bad,
                       time.perf_counter() - start, worst)


def check_two_stage(trials=200, eps=1e-6, seed=1, log=None):
    """Upper then lower bound auction: feasible and eps-CS."""
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    bad, worst = 0, -np.inf
    for _ in range(trials):
        n, K = int(rng.integers(4, 10)), int(rng.integers(2, 4))
        a = rng.random((n, K))
        bounds = random_bounds(rng, n, K)
        up = upper_bound_auction(eps, bounds, a)
        low = lower_bound_auction(eps, bounds, a, up.p, up.t, up.partition)
        if log:
            log.add(up)
            log.add(low)
        counts = low.partition.counts
        ok, gap = check_eps_cs(low.partition, a, low.p, low.t, eps)
        worst = max(worst, gap)
        if not ok or np.any(counts < bounds.lower) or np.any(counts > bounds.upper):
            bad += 1
    return CheckResult("two-stage feasibility and eps-CS", trials, bad,
                       time.perf_counter() - start, worst)


def check_duals(log):
    start = time.perf_counter()
    bad = sum(dual_violation(r) for r in log.results)
    return CheckResult("dual consistency", len(log.results), bad, time.perf_counter() - start)


def random_graph(rng, N, density=0.3):
    W = np.triu(rng.random((N, N)) * (rng.random((N, N)) < density), 1)
    return SparseGraph.from_dense(W + W.T)


def check_coefficients(trials=50, seed=2):
    """Sparse coefficients against the dense double loop, all concave kinds."""
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    bad, worst = 0, 0.0
    kinds = ("none", "poisson", "linear")
    for trial in range(trials):
        N, K = int(rng.integers(2, 51)), int(rng.integers(2, 5))
        G = random_graph(rng, N)
        labels = rng.integers(0, K, N)
        part = Partition.from_labels(labels, K)
        n_lab = int(rng.integers(0, N + 1))
        lab_idx = rng.choice(N, n_lab, replace=False)
        labeled = LabeledData(lab_idx, labels[lab_idx], K)
        kind = kinds[trial % 3]
        spec = ConcaveTermSpec(kind, gamma=float(rng.random() + 0.1),
                               R=rng.normal(size=(N, K)) if kind == "linear" else None)
        grad = concave_gradient(spec, labeled, K, N)
        rows = np.arange(N)
        got = assignment_coefficients(G, part, grad, rows)
        want = dense_coefficients(G.to_dense(), labels, grad)
        err = float(np.abs(got - want).max())
        worst = max(worst, err)
        if err > 1e-12:
            bad += 1
    return CheckResult("coefficient oracle equivalence", trials, bad,
                       time.perf_counter() - start, worst)


def check_margins(trials=1000, seed=3):
    """Margin is eps-free and the best score sits at the smallest margin."""
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    bad = 0
    for _ in range(trials):
        K = int(rng.integers(2, 6))
        a, p = rng.normal(size=K), rng.random(K)
        t = np.where(rng.random(K) < 0.5, 0.0, rng.random(K))
        p = np.where(t > 0, 0.0, p)
        m0 = margin(a, p, t, 0.0)[0]
        if any(margin(a, p, t, e)[0] != m0 for e in (1e-7, 1e-3, 0.5, 3.0)):
            bad += 1
            continue
        n = int(rng.integers(2, 20))
        A = rng.normal(size=(n, K))
        M = margins(A, p, t)
        if int(np.argmax(1.0 - M)) != int(np.argmin(M)):
            bad += 1
    return CheckResult("margin invariances", trials, bad, time.perf_counter() - start)


def psd_graph(rng, N):
    """Nonnegative positive semi-definite weights, ``V V^T`` with ``V >= 0``."""
    V = rng.random((N, int(rng.integers(2, 6)))) * (rng.random((N, 1)) + 0.2)
    return SparseGraph.from_dense(V @ V.T)


def check_energy(trials=20, seed=4, slack="N"):
    """Heat content trace of ``ssl_classify`` is non-increasing.

    Each step may rise by at most ``N * eps_final`` (``slack="N"``) or
    ``2 * n_unlabeled * eps_final`` (``slack="2n"``).
    """
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    bad, worst, steps = 0, -np.inf, 0
    for trial in range(trials):
        N, K = int(rng.integers(10, 61)), int(rng.integers(2, 5))
        G = psd_graph(rng, N)
        truth = rng.integers(0, K, N)
        truth[:K] = np.arange(K)
        lab_idx = np.sort(rng.choice(N, K + int(rng.integers(0, 4)), replace=False))
        labeled = LabeledData(lab_idx, truth[lab_idx], K)
        spec = ClassBoundsSpec("exact", np.bincount(truth, minlength=K)) if trial % 2 == 0 \
            else ClassBoundsSpec("none")
        schedule = AuctionSchedule()
        res = ssl_classify(G, labeled, spec, steps=50, seed=trial, init="random")
        bounds = derive_unlabeled_bounds(spec, labeled, N - len(lab_idx), K)
        init = initial_partition(G, labeled, bounds, trial, "random", schedule)
        trace = [ghc_energy(G, init)] + list(res.energy)
        n_unl = N - len(lab_idx)
        tol = (N if slack == "N" else 2 * n_unl) * (res.eps_final or 0.0)
        rises = np.diff(trace)
        steps += len(rises)
        if len(rises):
            worst = max(worst, float((rises - tol).max()))
            if np.any(rises > tol):
                bad += 1
    return CheckResult("energy monotonicity", trials, bad, time.perf_counter() - start,
                       worst, [f"{steps} steps"])


def run_all(quick=False):
    """Run every check; ``quick`` shrinks the trial counts."""
    scale = 4 if quick else 1
    log = _DualLog()
    results = [
        check_membership(200 // scale, log=log),
        check_two_stage(200 // scale, log=log),
    ]
    results.append(check_duals(log))
    results += [
        check_coefficients(max(50 // scale, 3)),
        check_margins(1000 // scale),
        check_energy(max(20 // scale, 2)),
    ]
    return results
