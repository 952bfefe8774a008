"""Acceptance criteria 1-10.

Each test prints one ``criterion N PASS|FAIL`` line with its measured
numbers, then asserts.  The toy and digits active-learning runs take
several minutes and are marked ``slow``; run this file alone with

    pytest -v tests/test_acceptance.py
"""
import os
import time

import numpy as np
import pytest

from malady.active import (ALBudget, initial_labeled_set, malady_loop, random_loop,
                           score_all)
from malady.dynamics import ClassBoundsSpec, LabeledData, ssl_classify
from malady.graph import KernelSpec, build_graph
from malady.harness import (ExperimentConfig, SyntheticBlobsSpec, generate_blobs,
                            load_dataset, run_experiment, write_csv_dataset)
from malady.verify import (_DualLog, check_coefficients, check_duals, check_energy,
                           check_margins, check_membership, check_two_stage)

SEEDS = range(10)
TOY_BUDGET = ALBudget(3, 106)  # 6 initial labels, 100 queries
DIGITS_BUDGET = ALBudget(5, 150)  # 5 per class over 10 classes, 100 queries


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number} {'PASS' if ok else 'FAIL'}: {detail}")
        return ok
    return emit


@pytest.fixture(scope="module")
def fuzz():
    log = _DualLog()
    membership = check_membership(200, eps=1e-6, seed=0, log=log)
    two_stage = check_two_stage(200, eps=1e-6, seed=1, log=log)
    return membership, two_stage, log


@pytest.fixture(scope="module")
def toy_runs():
    """Paired MALADY and random runs, one blob sample per seed."""
    runs = []
    start = time.perf_counter()
    for seed in SEEDS:
        X, labels = generate_blobs(seed=seed)
        G = build_graph(X, KernelSpec("gaussian", 20))
        bounds = ClassBoundsSpec("exact", np.bincount(labels))
        m = malady_loop(G, labels, TOY_BUDGET, bounds, seed=seed)
        r = random_loop(G, labels, TOY_BUDGET, bounds, seed=seed)
        runs.append((X, labels, G, bounds, m, r))
    return runs, time.perf_counter() - start


@pytest.fixture(scope="module")
def digits(tmp_path_factory):
    from sklearn.datasets import load_digits

    X, y = load_digits(return_X_y=True)
    path = tmp_path_factory.mktemp("digits") / "digits.csv"
    write_csv_dataset(path, X, y)
    X, labels, _ = load_dataset(path)
    G = build_graph(X, KernelSpec("gaussian", 10))
    bounds = ClassBoundsSpec("exact", np.bincount(labels))
    return [(malady_loop(G, labels, DIGITS_BUDGET, bounds, seed=s),
             random_loop(G, labels, DIGITS_BUDGET, bounds, seed=s)) for s in SEEDS]


def test_criterion_1_membership_near_optimal(fuzz, report):
    res = fuzz[0]
    ok = res.trials >= 200 and res.violations == 0 and res.seconds < 5
    report(1, ok, f"{res.trials} instances, {res.violations} violations, "
                  f"worst gap {res.worst:.3g}, {res.seconds:.2f}s")
    assert ok


def test_criterion_2_two_stage_feasible(fuzz, report):
    res = fuzz[1]
    ok = res.trials >= 200 and res.violations == 0
    report(2, ok, f"{res.trials} instances, {res.violations} violations, "
                  f"worst eps-CS gap {res.worst:.3g}")
    assert ok


def test_criterion_3_dual_consistency(fuzz, report):
    res = check_duals(fuzz[2])
    ok = res.trials >= 600 and res.violations == 0
    report(3, ok, f"{res.trials} auction returns, {res.violations} violations")
    assert ok


def test_criterion_4_coefficients(report):
    res = check_coefficients(50, seed=2)
    ok = res.violations == 0
    report(4, ok, f"{res.trials} graphs, max abs error {res.worst:.3g}")
    assert ok


def test_criterion_5_margins(report):
    res = check_margins(1000, seed=3)
    ok = res.violations == 0
    report(5, ok, f"{res.trials} score vectors, {res.violations} violations")
    assert ok


def test_criterion_6_energy(report):
    res = check_energy(20, seed=4, slack="N")
    ok = res.trials == 20 and res.violations == 0
    report(6, ok, f"{res.trials} seeds, {res.notes[0]}, {res.violations} violations, "
                  f"worst rise over slack {res.worst:.3g}")
    assert ok


def band_fraction(X, labels, G, bounds, record):
    """Share of the top-decile scores inside the band between opposite clusters."""
    seed = record.seed
    labeled = np.concatenate([
        initial_labeled_set(labels, TOY_BUDGET.initial_per_class,
                            np.random.default_rng([seed, 0])),
        np.asarray(record.queries, dtype=np.int64)])
    # the loop's final classifier run
    res = ssl_classify(G, LabeledData(labeled, labels[labeled], 2), bounds,
                       seed=[seed, 2, len(record.queries)])
    scores = score_all(res)
    top = scores.indices[np.argsort(-scores.scores, kind="stable")[:len(scores.indices) // 10]]
    C = SyntheticBlobsSpec().centers()
    D = np.linalg.norm(X[:, None, :] - C[None], axis=2)
    band = np.abs(D[:, 0::2].min(axis=1) - D[:, 1::2].min(axis=1)) < 0.5
    return float(band[top].mean())


@pytest.mark.slow
def test_criterion_7_boundary_concentration(toy_runs, report):
    fractions = [band_fraction(X, y, G, b, m) for X, y, G, b, m, _ in toy_runs[0]]
    mean = float(np.mean(fractions))
    ok = mean >= 0.6
    report(7, ok, f"top-decile share in band {mean:.3f} "
                  f"(per seed {', '.join(f'{f:.2f}' for f in fractions)})")
    assert ok


def paired(pairs):
    m = np.array([a.final_accuracy for a, _ in pairs])
    r = np.array([b.final_accuracy for _, b in pairs])
    return m, r, int(np.sum(m > r))


@pytest.mark.slow
def test_criterion_8_dominance(toy_runs, digits, report):
    runs, seconds = toy_runs
    tm, tr, twins = paired([(m, r) for *_, m, r in runs])
    dm, dr, dwins = paired(digits)
    ok = (tm.mean() > tr.mean() and twins >= 8 and tm.mean() >= 0.90 and seconds < 600
          and dm.mean() > dr.mean() and dwins >= 8)
    report(8, ok, f"toy MALADY {tm.mean():.3f} vs random {tr.mean():.3f}, wins {twins}/10, "
                  f"suite {seconds:.0f}s; digits MALADY {dm.mean():.3f} vs random "
                  f"{dr.mean():.3f}, wins {dwins}/10")
    assert ok


@pytest.mark.slow
def test_criterion_9_exact_constraints(toy_runs, report):
    exact, free = [], []
    for X, labels, G, bounds, m, _ in toy_runs[0]:
        exact.append(m.rows[0][3])
        labeled = initial_labeled_set(labels, TOY_BUDGET.initial_per_class,
                                      np.random.default_rng([m.seed, 0]))
        res = ssl_classify(G, LabeledData(labeled, labels[labeled], 2),
                           ClassBoundsSpec("none"), seed=[m.seed, 2, 0])
        unl = res.unlabeled
        free.append(float(np.mean(res.partition.assignment[unl] == labels[unl])))
    ok = np.mean(exact) >= np.mean(free)
    report(9, ok, f"initial-budget accuracy exact {np.mean(exact):.3f} "
                  f"vs none {np.mean(free):.3f}")
    assert ok


def test_criterion_10_determinism(tmp_path, report):
    base = {"dataset": {"synthetic": {"seed": 0}}, "budget": {"initial_per_class": 3,
                                                               "total": 16},
            "seeds": [0, 1, 2]}
    dirs = []
    for run in ("first", "second"):
        cfg = ExperimentConfig.from_dict({**base, "output": str(tmp_path / run)})
        dirs.append(run_experiment(cfg).directory)
    names = sorted(n for n in os.listdir(dirs[0]) if n != "meta.json")
    same = []
    for name in names:
        with open(os.path.join(dirs[0], name), "rb") as a, \
                open(os.path.join(dirs[1], name), "rb") as b:
            same.append(a.read() == b.read())
    ok = all(same) and len(names) == 5
    report(10, ok, f"{sum(same)}/{len(names)} result files byte-identical ({', '.join(names)})")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main(["-v", "-s", __file__]))
