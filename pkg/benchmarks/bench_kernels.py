"""Time the compiled and pure-Python kernels on the same inputs.

    python benchmarks/bench_kernels.py [--n 2000] [--k 4] [--repeat 3]

Prints one line per kernel with the best wall time of each backend and
checks that both backends return identical results.
"""
import argparse
import time

import numpy as np

from malady import _kernels
from malady.auction import MAX_EVENTS, repair_lower_bounds
from malady.graph import KernelSpec, build_graph
from malady.harness import generate_blobs


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def same(x, y):
    if isinstance(x, tuple):
        return all(same(u, v) for u, v in zip(x, y))
    if isinstance(x, np.ndarray):
        return np.array_equal(x, y)
    return x == y


def cases(n, K, seed):
    rng = np.random.default_rng(seed)
    a = rng.random((n, K))
    vol = np.full(K, n // K)
    vol[: n - vol.sum()] += 1
    lower = np.maximum(vol - n // (4 * K), 0)
    upper = vol + n // (4 * K)
    X, _ = generate_blobs(seed=seed)
    G = build_graph(X, KernelSpec("gaussian", 20))
    labels = rng.integers(0, K, G.n)
    rows = np.arange(G.n, dtype=np.int64)
    eps = 1e-6
    d0 = np.zeros(K)

    def lba(kern):
        up = kern.upper_bound_auction(eps, lower, upper, a, d0, MAX_EVENTS)
        assign, bids, d, _ = up
        # force lower-bound work: empty half of class 0 into class 1
        assign = assign.copy()
        moved = np.flatnonzero(assign == 0)[: vol[0] // 2]
        assign[moved] = 1
        return repair_lower_bounds(kern, eps, lower, np.maximum(upper, np.bincount(
            assign, minlength=K)), a, d, assign, bids, MAX_EVENTS)[:4]

    return {
        "membership_auction": lambda kern: kern.membership_auction(eps, vol, a, d0, MAX_EVENTS),
        "upper_bound_auction": lambda kern: kern.upper_bound_auction(
            eps, lower, upper, a, d0, MAX_EVENTS),
        "lower_bound_auction": lba,
        "outside_sums": lambda kern: kern.outside_sums(G.indptr, G.indices, G.weights,
                                                       labels, rows, K),
        "cut_weight": lambda kern: kern.cut_weight(G.indptr, G.indices, G.weights, labels),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=2000, help="auction elements")
    parser.add_argument("--k", type=int, default=4, help="classes")
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    backends = _kernels.available_backends()
    print(f"backends: {', '.join(backends)}; n={args.n}, K={args.k}")
    if "cython" not in backends:
        print("compiled kernels not built; only the Python timings are shown")
    print(f"{'kernel':<22}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, run in cases(args.n, args.k, args.seed).items():
        timings, outputs = [], []
        for b in backends:
            kern = _kernels.get_backend(b)
            t, out = best_of(lambda: run(kern), args.repeat)
            timings.append(t)
            outputs.append(out)
        line = f"{name:<22}" + "".join(f"{t * 1e3:>10.2f}ms" for t in timings)
        if len(timings) == 2:
            line += f"{timings[0] / timings[1]:>9.1f}x"
            if not same(outputs[0], outputs[1]):
                line += "  MISMATCH"
        print(line)


if __name__ == "__main__":
    main()
