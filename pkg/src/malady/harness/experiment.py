"""
Experiment runner
=================

Builds the graph once, runs one active-learning loop per seed and writes

* ``<output>/<hash>/seed-<s>.csv`` -- ``seed,iteration,num_labeled,query_index,accuracy``
* ``<output>/<hash>/aggregate.json`` -- mean and std accuracy per labeled-set size
* ``<output>/<hash>/curve.csv`` -- long-format curve for plotting
* ``<output>/<hash>/meta.json`` -- wall times and backend; the only
  file that differs between reruns

Seed files are written as each seed finishes, so a failing seed leaves
the others on disk; the failure is listed in the aggregate.
"""
import json
import logging
import os
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from ..active import malady_loop, random_loop
from ..graph import build_graph
from .config import SyntheticDataset, config_hash
from .datasets import generate_blobs, load_dataset

logger = logging.getLogger(__name__)

SEED_HEADER = "seed,iteration,num_labeled,query_index,accuracy\n"


@dataclass(eq=False)
class ExperimentResult:
    """In-memory view of what ``run_experiment`` wrote."""

    config_hash: str
    directory: str
    records: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    aggregate: dict = field(default_factory=dict)


def load_features(config):
    """Features and dense labels of the configured dataset."""
    ds = config.dataset
    if isinstance(ds, SyntheticDataset):
        return generate_blobs(ds.blobs, ds.seed)
    X, labels, _ = load_dataset(ds.path, ds.format, ds.label_column)
    return X, labels


def _loop(config):
    return malady_loop if config.acquisition == "malady" else random_loop


def _run_seed(graph, labels, config, seed, chash):
    bounds = config.bounds.resolve(labels)
    record = _loop(config)(graph, labels, config.budget, bounds, config.concave,
                           config.schedule, config.steps, seed)
    record.config_hash = chash
    return record


def write_seed_csv(path, record):
    with open(path, "w") as f:
        f.write(SEED_HEADER)
        for it, num, query, acc in record.rows:
            f.write(f"{record.seed},{it},{num},{query},{acc!r}\n")


def aggregate_records(records):
    """Mean and population std of accuracy per labeled-set size."""
    by_size = {}
    for seed in sorted(records):
        for _, num, _, acc in records[seed].rows:
            by_size.setdefault(num, []).append(acc)
    curve = []
    for num in sorted(by_size):
        vals = np.asarray(by_size[num])
        curve.append({"num_labeled": num, "mean": float(np.mean(vals)),
                      "std": float(np.std(vals)), "n_seeds": len(vals)})
    return curve


def _write_outputs(directory, config, chash, records, failures):
    curve = aggregate_records(records)
    finals = [records[s].final_accuracy for s in sorted(records)]
    aggregate = {
        "config_hash": chash,
        "config": {k: v for k, v in config.to_dict().items() if k != "output"},
        "acquisition": config.acquisition,
        "curve": curve,
        "final_accuracy": {
            "mean": float(np.mean(finals)) if finals else None,
            "std": float(np.std(finals)) if finals else None,
        },
        "seeds": [{"seed": s, "final_accuracy": records[s].final_accuracy,
                   "exhausted": records[s].exhausted, "queries": records[s].queries}
                  for s in sorted(records)],
        "failures": [{"seed": s, "error": failures[s]} for s in sorted(failures)],
    }
    with open(os.path.join(directory, "aggregate.json"), "w") as f:
        json.dump(aggregate, f, indent=2, sort_keys=True)
        f.write("\n")
    with open(os.path.join(directory, "curve.csv"), "w") as f:
        f.write("acquisition,seed,num_labeled,accuracy\n")
        for s in sorted(records):
            for _, num, _, acc in records[s].rows:
                f.write(f"{config.acquisition},{s},{num},{acc!r}\n")
    return aggregate


def run_experiment(config, n_jobs=1):
    """Run every seed of ``config`` and write the result files.

    Parameters
    ----------
    config : ExperimentConfig
    n_jobs : int
        Seeds run in this many worker processes; 1 runs them inline.

    Returns
    -------
    ExperimentResult
    """
    chash = config_hash(config)
    directory = os.path.join(config.output, chash)
    os.makedirs(directory, exist_ok=True)
    X, labels = load_features(config)
    graph = build_graph(X, config.kernel)
    logger.info("graph: %d points, %d stored weights", graph.n, graph.nnz)

    records, failures, errors, times = {}, {}, {}, {}

    def collect(seed, get):
        try:
            rec = get()
        except Exception as exc:  # noqa: BLE001 -- recorded, run continues
            failures[seed] = f"{type(exc).__name__}: {exc}"
            errors[seed] = exc
            logger.warning("seed %d failed: %s", seed, failures[seed])
            return
        records[seed] = rec
        times[seed] = rec.wall_time
        write_seed_csv(os.path.join(directory, f"seed-{seed}.csv"), rec)

    if n_jobs == 1:
        for seed in config.seeds:
            collect(seed, lambda s=seed: _run_seed(graph, labels, config, s, chash))
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            futures = {s: pool.submit(_run_seed, graph, labels, config, s, chash)
                       for s in config.seeds}
            for seed, fut in futures.items():
                collect(seed, fut.result)

    aggregate = _write_outputs(directory, config, chash, records, failures)
    meta = {"config_hash": chash, "backend": _kernels.BACKEND,
            "python": platform.python_version(),
            "wall_time": {str(s): times[s] for s in sorted(times)}}
    with open(os.path.join(directory, "meta.json"), "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")
    return ExperimentResult(chash, directory, records, failures, errors, aggregate)
