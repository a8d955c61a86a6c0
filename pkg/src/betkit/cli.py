"""Command-line entry point for experiment suites and rank comparison.

Usage::

    betkit <experiment> [flags]        run one experiment suite
    betkit compare A.csv B.csv [...]   rank-agreement report

Exit codes: 0 on success, 2 on configuration errors, 3 on dataset
errors.  The environment variable BETKIT_THREADS overrides --threads.
"""

from __future__ import annotations

import argparse
import json
import sys

from .datastore import DatasetError
from .harness import EXPERIMENTS, ExperimentConfig, compare_ranks, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="betkit",
        description="Sequential kernelized independence tests for concept importance.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment suite")
        p.add_argument("--alpha", type=float, default=0.05, help="significance level")
        p.add_argument("--tau-max", type=int, default=1000, help="sample budget per test")
        p.add_argument("--kernel", choices=("rbf", "linear"), default="rbf")
        p.add_argument(
            "--bandwidth-q",
            type=float,
            default=0.5,
            help="pairwise-distance quantile for the rbf bandwidth",
        )
        p.add_argument("--strategy", choices=("ons", "constant"), default="ons")
        p.add_argument("--reps", type=int, default=100, help="repetitions per concept")
        p.add_argument("--seed", type=int, default=7)
        p.add_argument("--manifest", help="dataset manifest (real-data modes)")
        p.add_argument("--concept", help="restrict to one concept by name")
        p.add_argument("--class", dest="target_class", help="target class name for scoring")
        p.add_argument("--sample-id", help="row id or index for the local mode")
        p.add_argument("--cond-size", type=int, default=1, help="conditioning-set size (local)")
        p.add_argument("--betas", type=_float_list, default=(0.0, 0.5, 1.0, 2.0),
                       help="comma-separated sweep grid for the Gaussian suites")
        p.add_argument("--z3s", type=_float_list, default=(-0.5, 0.0, 0.5),
                       help="comma-separated z3 grid for the local Gaussian suite")
        p.add_argument("--target-neff", type=float, help="KDE effective sample size target")
        p.add_argument("--out", default="results", help="output directory")
        p.add_argument("--threads", type=int, help="worker pool size (default: all cores)")
        p.add_argument("--plot", action="store_true", help="also write wealth.svg")

    c = sub.add_parser("compare", help="rank-agreement report between two results.csv files")
    c.add_argument("results_a")
    c.add_argument("results_b")
    c.add_argument("--alpha", type=float, default=0.05)
    c.add_argument("--truth", help="JSON file with the list of truly important concepts")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        if args.command == "compare":
            truth = None
            if args.truth:
                truth = json.loads(open(args.truth).read())
            report = compare_ranks(args.results_a, args.results_b, alpha=args.alpha, truth=truth)
            print(json.dumps(report, indent=2))
            return EXIT_OK

        cfg = ExperimentConfig(
            experiment=args.command,
            alpha=args.alpha,
            tau_max=args.tau_max,
            kernel=args.kernel,
            bandwidth_q=args.bandwidth_q,
            strategy=args.strategy,
            reps=args.reps,
            seed=args.seed,
            beta_grid=args.betas,
            z3_grid=args.z3s,
            cond_size=args.cond_size,
            manifest=args.manifest,
            concept=args.concept,
            target_class=args.target_class,
            sample_id=args.sample_id,
            out_dir=args.out,
            threads=args.threads,
            target_neff=args.target_neff,
            make_plot=args.plot,
        )
        result = run_experiment(cfg)
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    for row in result["rows"]:
        rank = row["fdr_rank"]
        print(
            f"{row['concept']}: rejection_rate={row['rejection_rate']:.3f} "
            f"mean_tau={row['mean_normalized_tau']:.3f}"
            + (f" fdr_rank={rank}" if rank is not None else "")
        )
    print(f"results written to {result['csv']}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
