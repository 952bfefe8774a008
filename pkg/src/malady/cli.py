"""Command-line entry point: ``malady run|blobs|graph|verify``."""
import argparse
import json
import logging
import sys

from .errors import ConfigError, FormatError, InfeasibleError, InvalidParameterError

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4


def _cmd_run(args):
    from .harness import ExperimentConfig, run_experiment

    config = ExperimentConfig.from_json(args.config)
    if args.output:
        config = config.replace(output=args.output)
    result = run_experiment(config, n_jobs=args.jobs)
    final = result.aggregate["final_accuracy"]
    print(json.dumps({"directory": result.directory, "final_accuracy": final,
                      "failures": result.aggregate["failures"]}))
    if result.errors:
        if any(isinstance(e, InfeasibleError) for e in result.errors.values()):
            return EXIT_INFEASIBLE
        return EXIT_FAILED
    return EXIT_OK


def _cmd_blobs(args):
    from .harness import generate_blobs, write_csv_dataset

    X, labels = generate_blobs(seed=args.seed)
    write_csv_dataset(args.out, X, labels)
    return EXIT_OK


def _cmd_graph(args):
    from .graph import KernelSpec, build_graph
    from .harness import load_dataset

    label_column = None if args.no_labels else "last"
    X, _, _ = load_dataset(args.input, args.format, label_column)
    spec = KernelSpec(args.kernel, args.k)
    build_graph(X, spec).write_edge_list(args.out)
    return EXIT_OK


def _cmd_verify(args):
    from .verify import run_all

    results = run_all(quick=args.quick)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def build_parser():
    parser = argparse.ArgumentParser(prog="malady", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--output", help="override the config's output directory")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for seeds")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("blobs", help="write the six-cluster toy set as CSV")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_blobs)

    p = sub.add_parser("graph", help="build a kNN graph and write its edge list")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--kernel", choices=("gaussian", "cosine"), default="gaussian")
    p.add_argument("--format", choices=("csv", "binary"), default="csv")
    p.add_argument("--no-labels", action="store_true",
                   help="the CSV has no trailing label column")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_graph)

    p = sub.add_parser("verify", help="run the oracle-backed property checks")
    p.add_argument("--quick", action="store_true", help="fewer trials")
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    if args.command == "graph" and args.format == "binary":
        args.no_labels = True
    try:
        return args.func(args)
    except (ConfigError, InvalidParameterError) as exc:
        print(f"malady: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"malady: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, FormatError) as exc:
        print(f"malady: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
