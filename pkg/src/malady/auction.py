"""
Auction solvers for volume-constrained assignment
=================================================

Elements bid for classes; class ``i`` carries a price ``p_i`` (deters
over-subscription) and an incentive ``t_i`` (attracts members to an
under-filled class).  Internally both live in one net value
``d = p - t``.

* :func:`membership_auction` -- exact class volumes.
* :func:`upper_bound_auction` -- complete matching with ``|X_i| <= U_i``.
* :func:`lower_bound_auction` -- repairs lower bounds ``|X_i| >= B_i``.
* :func:`scaled_auction` -- alternates the two with geometrically
  decreasing ``eps``.

Every returned matching satisfies eps-complementary slackness:
``a_i(x) - p_i + t_i + eps >= max_j a_j(x) - p_j + t_j`` for each
matched ``(x, i)``.
"""
import json
import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InfeasibleError, InvalidParameterError

logger = logging.getLogger(__name__)

UNASSIGNED = -1
MAX_EVENTS = 1_000_000


@dataclass(frozen=True, eq=False)
class Bounds:
    """Per-class lower and upper member counts."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=np.int64).copy()
        upper = np.asarray(self.upper, dtype=np.int64).copy()
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise InvalidParameterError("lower and upper must be equal-length vectors")
        if np.any(lower < 0) or np.any(lower > upper):
            raise InvalidParameterError("bounds must satisfy 0 <= B_i <= U_i")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def exact(cls, volumes):
        return cls(volumes, volumes)

    @classmethod
    def unconstrained(cls, n_classes, n_elements):
        return cls(np.zeros(n_classes, dtype=np.int64),
                   np.full(n_classes, n_elements, dtype=np.int64))

    @property
    def n_classes(self):
        return len(self.lower)

    def check_feasible(self, n_elements):
        if self.lower.sum() > n_elements:
            raise InfeasibleError(
                f"lower bounds sum to {self.lower.sum()} > {n_elements} elements")
        if self.upper.sum() < n_elements:
            raise InfeasibleError(
                f"upper bounds sum to {self.upper.sum()} < {n_elements} elements")

    def __repr__(self):
        return f"Bounds(lower={self.lower.tolist()}, upper={self.upper.tolist()})"


@dataclass(frozen=True)
class AuctionSchedule:
    """eps-scaling schedule; rounds run while ``eps >= epsilon_min / N``."""

    epsilon0: float = 1e-7
    epsilon_min: float = 1e-6
    alpha: float = 4.0

    def __post_init__(self):
        if not self.epsilon0 > 0 or not self.epsilon_min > 0:
            raise InvalidParameterError("epsilon0 and epsilon_min must be positive")
        if not self.alpha > 1:
            raise InvalidParameterError("alpha must exceed 1")

    def epsilons(self, n_total):
        """The eps value of every auction round for a problem of size ``n_total``."""
        eps_bar = self.epsilon_min / n_total
        if self.epsilon0 < eps_bar:
            raise InvalidParameterError(
                f"epsilon0={self.epsilon0} is below the stopping threshold "
                f"{eps_bar}; the schedule would run no auction round")
        out = []
        eps = self.epsilon0
        while eps >= eps_bar:
            out.append(eps)
            eps /= self.alpha
        return out


@dataclass(eq=False)
class Partition:
    """Class assignment of each element plus the bid it last placed."""

    assignment: np.ndarray
    bids: np.ndarray
    n_classes: int

    @classmethod
    def from_labels(cls, labels, n_classes):
        labels = np.asarray(labels, dtype=np.int64)
        return cls(labels.copy(), np.zeros(len(labels)), n_classes)

    @property
    def counts(self):
        a = self.assignment[self.assignment != UNASSIGNED]
        return np.bincount(a, minlength=self.n_classes)

    def members(self, i):
        return np.flatnonzero(self.assignment == i)

    @property
    def is_complete(self):
        return bool(np.all(self.assignment != UNASSIGNED))

    def __len__(self):
        return len(self.assignment)


@dataclass(eq=False)
class AuctionResult:
    """Matching with its duals.

    ``d`` is the net value tracked by the solver; ``p = max(d, 0)`` and
    ``t = max(-d, 0)``.  ``eps`` is the last eps used.
    """

    partition: Partition
    p: np.ndarray
    t: np.ndarray
    d: np.ndarray
    eps: float
    events: int
    rounds: int = 1


def _split(d):
    d = np.asarray(d, dtype=np.float64)
    return np.maximum(d, 0.0), np.maximum(-d, 0.0)


def _coefficients(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise InvalidParameterError("coefficients must be an (n, K) matrix")
    if a.shape[1] < 2:
        raise InvalidParameterError("at least two classes are required")
    if not np.all(np.isfinite(a)):
        raise InvalidParameterError("coefficients must be finite")
    return a


def _duals(v, K, name):
    if v is None:
        return np.zeros(K)
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (K,):
        raise InvalidParameterError(f"{name} must have one entry per class")
    return v


def _eps(eps):
    if not eps > 0:
        raise InvalidParameterError("eps must be positive")
    return float(eps)


def _block_closed(a, assign, d, capacity):
    """Price zero-capacity classes so that no element envies them.

    The solvers never let anyone bid for such a class, so its net value
    is free; it is raised to the largest gain any element would see there.
    """
    closed = np.flatnonzero(np.asarray(capacity) == 0)
    if len(closed) == 0 or len(assign) == 0:
        return d
    d = d.copy()
    held = a[np.arange(len(assign)), assign] - d[assign]
    for i in closed:
        d[i] = max(d[i], float(np.max(a[:, i] - held)))
    return d


def best_and_second(a_row, d):
    """Best and second-best class of ``a_row - d``.

    Returns ``(i_star, v, i_next, w)`` with ``v >= w``; ties go to the
    lowest class index.
    """
    vals = np.asarray(a_row, dtype=np.float64) - np.asarray(d, dtype=np.float64)
    if vals.ndim != 1 or len(vals) < 2:
        raise InvalidParameterError("at least two classes are required")
    i_star = int(np.argmax(vals))
    rest = vals.copy()
    rest[i_star] = -np.inf
    i_next = int(np.argmax(rest))
    return i_star, float(vals[i_star]), i_next, float(vals[i_next])


def total_benefit(partition, a):
    a = np.asarray(a, dtype=np.float64)
    return float(a[np.arange(len(partition)), partition.assignment].sum())


def membership_auction(eps, volumes, a, p0=None, max_events=MAX_EVENTS):
    """Forward auction with exact class volumes.

    Parameters
    ----------
    eps : float
        Minimum bid increment.
    volumes : (K,) ints
        Required member count of each class; must sum to ``n``.
    a : (n, K) array
        Benefit of placing element ``x`` in class ``i``.
    p0 : (K,) array, optional
        Starting prices (zero by default).

    Returns
    -------
    AuctionResult
        ``t`` is identically zero.
    """
    eps = _eps(eps)
    a = _coefficients(a)
    n, K = a.shape
    volumes = np.asarray(volumes, dtype=np.int64)
    if volumes.shape != (K,) or np.any(volumes < 0):
        raise InvalidParameterError("volumes must be K nonnegative counts")
    if volumes.sum() != n:
        raise InfeasibleError(f"volumes sum to {volumes.sum()}, expected {n}")
    p0 = _duals(p0, K, "p0")
    assign, bids, p, events = _kernels.membership_auction(eps, volumes, a, p0, max_events)
    p = _block_closed(a, assign, p, volumes)
    return AuctionResult(Partition(assign, bids, K), p, np.zeros(K), p.copy(), eps, events)


def upper_bound_auction(eps, bounds, a, p0=None, t0=None, max_events=MAX_EVENTS):
    """Complete eps-CS matching that respects the upper bounds.

    Starts with every element unassigned and net values ``d = p0 - t0``.
    """
    eps = _eps(eps)
    a = _coefficients(a)
    n, K = a.shape
    if bounds.n_classes != K:
        raise InvalidParameterError("bounds and coefficients disagree on K")
    if bounds.upper.sum() < n:
        raise InfeasibleError(
            f"upper bounds sum to {bounds.upper.sum()} < {n} elements")
    d0 = _duals(p0, K, "p0") - _duals(t0, K, "t0")
    assign, bids, d, events = _kernels.upper_bound_auction(
        eps, bounds.lower, bounds.upper, a, d0, max_events)
    d = _block_closed(a, assign, d, bounds.upper)
    p, t = _split(d)
    return AuctionResult(Partition(assign, bids, K), p, t, d, eps, events)


def lower_bound_auction(eps, bounds, a, p0, t0, partition0, max_events=MAX_EVENTS):
    """Move elements into deficient classes until ``B <= |X| <= U``.

    ``partition0`` must be complete, respect the upper bounds and be
    eps-CS with ``(p0, t0)`` -- typically the output of
    :func:`upper_bound_auction`.
    """
    eps = _eps(eps)
    a = _coefficients(a)
    n, K = a.shape
    bounds.check_feasible(n)
    if not partition0.is_complete:
        raise InvalidParameterError("lower bound auction needs a complete partition")
    if len(partition0) != n:
        raise InvalidParameterError("partition and coefficients disagree on n")
    d0 = _duals(p0, K, "p0") - _duals(t0, K, "t0")
    args = (_kernels, eps, bounds.lower, bounds.upper, a, d0,
            partition0.assignment, partition0.bids, max_events)
    assign, bids, d, events, skipped = repair_lower_bounds(*args)
    d = _block_closed(a, assign, d, bounds.upper)
    p, t = _split(d)
    if skipped and not check_eps_cs(Partition(assign, bids, K), a, p, t, eps)[0]:
        # a jump landed off the plain trajectory; redo without jumps
        assign, bids, d, more, _ = repair_lower_bounds(*args, skip=False)
        events += more
        d = _block_closed(a, assign, d, bounds.upper)
        p, t = _split(d)
    return AuctionResult(Partition(assign, bids, K), p, t, d, eps, events)


MAX_CYCLE = 32
MIN_SKIP = 8


def _pass(kern, eps, lower, upper, a, d, assign, bids, counts, budget):
    return kern.lower_bound_pass(eps, lower, upper, a, d, assign, bids, counts, budget)


def _same_shift(x, y, scale):
    return bool(np.allclose(x, y, rtol=1e-6, atol=1e-12 * scale))


def _skip_cycle(kern, eps, lower, upper, a, state, period, delta, budget):
    """Jump over repeats of a block of passes that returns every element home.

    The block shifts the net values by ``delta``.  A replay of the block
    ``k`` repeats ahead, from ``d + k * delta``, that again brings every
    element home and shifts by ``delta`` certifies the jump; the largest
    such ``k`` is found by doubling from ``MIN_SKIP`` then bisection.
    Returns the state after that replay (or None) and the events spent.
    """
    d, assign, bids, counts = state
    scale = max(1.0, float(np.abs(a).max()), float(np.abs(d).max()))
    spent = 0

    def replay(k):
        nonlocal spent
        d_k = d + k * delta
        trial = (d_k.copy(), assign.copy(), bids.copy(), counts.copy())
        for _ in range(period):
            ev, _ = _pass(kern, eps, lower, upper, a, *trial, budget - spent)
            spent += ev
        ok = np.array_equal(trial[1], assign) and _same_shift(trial[0] - d_k, delta, scale)
        return ok, trial

    good, good_state, bad = 0, None, None
    k = MIN_SKIP
    while k < 2 ** 52:
        ok, trial = replay(k)
        if not ok:
            bad = k
            break
        good, good_state = k, trial
        k *= 2
    if good == 0:
        return None, spent
    if bad is not None:
        while bad - good > 1:
            mid = (good + bad) // 2
            ok, trial = replay(mid)
            if ok:
                good, good_state = mid, trial
            else:
                bad = mid
    return good_state, spent


def repair_lower_bounds(kern, eps, lower, upper, a, d0, assign0, bids0, max_events,
                        skip=True):
    """Lower bound auction driver over a kernel's single-pass routine.

    Passes repeat until none moves anything.  A class with a positive
    price below its upper bound and a class at its lower bound can trade
    one element back and forth, each round moving their net values by
    about ``2 eps`` (a price war).  With ``skip``, once the last ``p``
    passes (``p <= MAX_CYCLE``) bring every element home with the same
    net-value shift as the ``p`` before them, the remaining repeats are
    jumped over (see :func:`_skip_cycle`).

    Returns ``(assign, bids, d, events, skipped)``; ``events`` counts
    executed steps only.
    """
    K = a.shape[1]
    d = np.array(d0, dtype=np.float64)
    assign = np.array(assign0, dtype=np.int64)
    bids = np.array(bids0, dtype=np.float64)
    counts = np.bincount(assign, minlength=K).astype(np.int64)
    lower = np.ascontiguousarray(lower, dtype=np.int64)
    upper = np.ascontiguousarray(upper, dtype=np.int64)
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    events = 0
    skipped = False
    starts = []  # (assignment, net values) at the start of recent passes
    while True:
        starts.append((assign.copy(), d.copy()))
        ev, moves = _pass(kern, eps, lower, upper, a, d, assign, bids, counts,
                          max_events - events)
        events += ev
        if not moves:
            return assign, bids, d, events, skipped
        if not skip:
            continue
        del starts[:-2 * MAX_CYCLE]
        for p in range(1, min(MAX_CYCLE, len(starts) // 2) + 1):
            if not (np.array_equal(starts[-p][0], assign)
                    and np.array_equal(starts[-2 * p][0], assign)):
                continue
            delta = d - starts[-p][1]
            if not np.any(delta != 0) or not _same_shift(
                    delta, starts[-p][1] - starts[-2 * p][1], scale):
                continue
            state, spent = _skip_cycle(kern, eps, lower, upper, a,
                                       (d, assign, bids, counts), p, delta,
                                       max_events - events)
            events += spent
            if state is not None:
                d, assign, bids, counts = state
                skipped = True
                starts.clear()
                break


def check_eps_cs(partition, a, p, t, eps, tol=None):
    """Check eps-complementary slackness of a complete matching.

    Returns ``(ok, worst)`` where ``worst`` is the largest
    ``best value - assigned value - eps`` over elements.  ``tol`` absorbs
    floating-point rounding; by default 16 ulps of the largest magnitude
    among ``a``, ``p`` and ``t``.
    """
    a = np.asarray(a, dtype=np.float64)
    if not partition.is_complete:
        raise InvalidParameterError("eps-CS is defined for complete matchings only")
    vals = a - np.asarray(p, dtype=np.float64) + np.asarray(t, dtype=np.float64)
    assigned = vals[np.arange(len(partition)), partition.assignment]
    gap = vals.max(axis=1) - assigned - eps
    worst = float(gap.max()) if len(gap) else -eps
    if tol is None:
        scale = max(1.0, float(np.abs(a).max(initial=0.0)),
                    float(np.abs(p).max(initial=0.0)), float(np.abs(t).max(initial=0.0)))
        tol = 16 * np.finfo(float).eps * scale
    return worst <= tol, worst


def scaled_auction(a, bounds, schedule, n_total, max_events=MAX_EVENTS, verbose=False):
    """Upper- then lower-bound auction per eps round, warm-starting duals.

    Duals start at zero; eps is divided by ``schedule.alpha`` after each
    round until it drops below ``schedule.epsilon_min / n_total``.  With
    ``verbose`` each round is logged as a JSON object.
    """
    a = _coefficients(a)
    n, K = a.shape
    bounds.check_feasible(n)
    eps_list = schedule.epsilons(n_total)
    d = np.zeros(K)
    events = 0
    res = None
    for eps in eps_list:
        p, t = _split(d)
        up = upper_bound_auction(eps, bounds, a, p, t, max_events)
        res = lower_bound_auction(eps, bounds, a, up.p, up.t, up.partition, max_events)
        d = res.d
        events += up.events + res.events
        if verbose:
            logger.info(json.dumps({
                "epsilon": eps,
                "p": res.p.tolist(),
                "t": res.t.tolist(),
                "assignment": res.partition.assignment.tolist(),
                "total_benefit": total_benefit(res.partition, a),
            }))
    res.events = events
    res.rounds = len(eps_list)
    return res
