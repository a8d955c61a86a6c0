"""Experiment orchestration: suites, repetitions, aggregation, reports.

`run_experiment` executes one of five experiment modes, two synthetic
laboratories with known ground truth and three dataset-backed modes
(marginal, conditional, local), across repetitions and concepts, with
per-(concept, repetition) seeds derived from the master seed so results
are reproducible regardless of scheduling or worker count.

Outputs per run: ``results.csv`` with one row per concept (rejection
rate, mean normalized rejection time, modal FDR rank), ``run.json``
echoing the resolved configuration and library versions, and optionally
``wealth.svg`` with first-repetition log-wealth trajectories.
"""

from __future__ import annotations

import dataclasses
import json
import os
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .betting import BettingStrategy
from .datastore import (
    load_dataset,
    project_concepts,
    stream_global,
    stream_global_conditional,
)
from .kernels import KernelSpec
from .multiplicity import (
    ConceptTrajectories,
    aggregate_outcomes,
    greedy_fdr,
    importance_agreement,
    importance_f1,
    weighted_kendall_tau,
)
from .samplers import EmbeddingSampler, WeightedKdeSampler
from .synthetic import (
    COUNTING_CONCEPTS,
    CountingDgpParams,
    GaussianDgpParams,
    counting_oracle_predictor,
    gaussian_response,
    gaussian_subset_sampler,
    gaussian_z1_sampler,
    sample_counting_dgp,
    sample_gaussian_dgp,
)
from .testers import TestConfig, TestOutcome, run_cskit, run_skit, run_xskit

__all__ = ["ExperimentConfig", "EXPERIMENTS", "run_experiment", "compare_ranks"]

EXPERIMENTS = ("synthetic-gaussian", "synthetic-counting", "global", "global-cond", "local")

# Fixed response coefficients for the Gaussian sweeps: the swept
# coefficient is replaced per grid point, the others stay at 1 so the
# response always carries signal from the untested concepts.
_GAUSSIAN_FIXED_BETA = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved settings for one experiment invocation."""

    experiment: str
    alpha: float = 0.05
    tau_max: int = 1000
    kernel: str = "rbf"
    bandwidth_q: float = 0.5
    strategy: str = "ons"
    reps: int = 100
    seed: int = 0
    beta_grid: tuple[float, ...] = (0.0, 0.5, 1.0, 2.0)
    z3_grid: tuple[float, ...] = (-0.5, 0.0, 0.5)
    cond_size: int = 1
    manifest: str | None = None
    concept: str | None = None
    target_class: str | None = None
    sample_id: str | None = None
    out_dir: str = "results"
    threads: int | None = None
    target_neff: float | None = None
    make_plot: bool = False

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if not self.beta_grid or not self.z3_grid:
            raise ValueError("sweep grids must be nonempty")
        if self.cond_size < 0:
            raise ValueError("conditioning-set size must be nonnegative")
        if self.experiment in ("global", "global-cond", "local") and not self.manifest:
            raise ValueError(f"experiment {self.experiment!r} requires a dataset manifest")

    def test_config(self, seed: int, stop_at_rejection: bool = True) -> TestConfig:
        spec = KernelSpec(family=self.kernel, rule="quantile", q=self.bandwidth_q)
        return TestConfig(
            alpha=self.alpha,
            tau_max=self.tau_max,
            kernel_y=spec,
            kernel_z=spec,
            kernel_zrest=spec,
            strategy=BettingStrategy(self.strategy),
            seed=seed,
            stop_at_rejection=stop_at_rejection,
        )


def _unit_seeds(master_seed: int, unit: int, rep: int) -> tuple[np.random.Generator, int]:
    """Data generator and test seed for one (concept, repetition) task.

    Derived through `SeedSequence` spawn keys, so outcomes depend only
    on (master seed, unit, rep), never on scheduling or total reps.
    """
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(unit, rep))
    data_ss, test_ss = ss.spawn(2)
    test_seed = int(test_ss.generate_state(1, np.uint64)[0])
    return np.random.default_rng(data_ss), test_seed


# --------------------------------------------------------------------------
# Experiment contexts: everything a worker needs, built once per process.

_CTX: dict = {}


def _build_context(cfg: ExperimentConfig) -> dict:
    if cfg.experiment == "synthetic-gaussian":
        units = (
            [("skit", b, f"skit:beta2={b:g}") for b in cfg.beta_grid]
            + [("cskit", b, f"cskit:beta1={b:g}") for b in cfg.beta_grid]
            + [("xskit", z, f"xskit:z3={z:g}") for z in cfg.z3_grid]
        )
        return {"units": units, "labels": [u[2] for u in units], "fdr": False}
    if cfg.experiment == "synthetic-counting":
        return {"labels": list(COUNTING_CONCEPTS), "fdr": True}

    ds, cd, clf = load_dataset(cfg.manifest)
    if cfg.target_class is not None:
        if cfg.target_class not in clf.class_names:
            raise ValueError(f"unknown class {cfg.target_class!r}")
        clf = dataclasses.replace(clf, target_class=clf.class_names.index(cfg.target_class))
    Z = project_concepts(ds, cd)
    logits = ds.H @ clf.weights.T
    if clf.score_mode == "logit":
        scores = logits[:, clf.target_class]
    else:
        ex = np.exp((logits - logits.max(axis=1, keepdims=True)) / clf.temperature)
        scores = (ex / ex.sum(axis=1, keepdims=True))[:, clf.target_class]
    if cfg.concept is not None:
        if cfg.concept not in cd.names:
            raise ValueError(f"unknown concept {cfg.concept!r}")
        concept_idx = [cd.names.index(cfg.concept)]
    else:
        concept_idx = list(range(cd.m))
    ctx = {
        "Z": Z,
        "scores": scores,
        "clf": clf,
        "concept_idx": concept_idx,
        "labels": [cd.names[j] for j in concept_idx],
        "fdr": True,
    }
    if cfg.experiment == "global-cond":
        neff = cfg.target_neff
        ctx["kde"] = WeightedKdeSampler(Z, min(neff or 2000.0, float(Z.shape[0])))
    if cfg.experiment == "local":
        ctx["sampler"] = EmbeddingSampler(ds.H, Z, cfg.target_neff)
        row = 0
        if cfg.sample_id is not None:
            if ds.ids and cfg.sample_id in ds.ids:
                row = ds.ids.index(cfg.sample_id)
            else:
                try:
                    row = int(cfg.sample_id)
                except ValueError:
                    raise ValueError(f"unknown sample id {cfg.sample_id!r}") from None
                if not 0 <= row < ds.n:
                    raise ValueError(f"sample index {row} out of range")
        ctx["z_obs"] = Z[row]
    return ctx


def _run_unit(cfg: ExperimentConfig, ctx: dict, unit: int, rep: int) -> TestOutcome:
    rng, test_seed = _unit_seeds(cfg.seed, unit, rep)
    # ranked modes need the full trajectories: the per-round thresholds
    # m/(alpha*s) sit above the single-test threshold 1/alpha
    tc = cfg.test_config(test_seed, stop_at_rejection=not ctx["fdr"])

    if cfg.experiment == "synthetic-gaussian":
        kind, value, _ = ctx["units"][unit]
        if kind == "skit":
            params = GaussianDgpParams(
                beta1=_GAUSSIAN_FIXED_BETA, beta2=value, beta3=_GAUSSIAN_FIXED_BETA
            )
            Z, Y = sample_gaussian_dgp(params, cfg.tau_max, rng)
            return run_skit(zip(Y, Z[:, 1]), tc)
        if kind == "cskit":
            params = GaussianDgpParams(
                beta1=value, beta2=_GAUSSIAN_FIXED_BETA, beta3=_GAUSSIAN_FIXED_BETA
            )
            Z, Y = sample_gaussian_dgp(params, cfg.tau_max, rng)
            stream = ((Y[i], Z[i, 0], Z[i, 1:]) for i in range(Z.shape[0]))
            return run_cskit(stream, gaussian_z1_sampler(params), tc)
        params = GaussianDgpParams(
            beta1=_GAUSSIAN_FIXED_BETA, beta2=_GAUSSIAN_FIXED_BETA, beta3=_GAUSSIAN_FIXED_BETA
        )
        z_obs = np.array([params.mu1, 1.0, value])
        return run_xskit(
            z_obs,
            j=1,
            S=[2],
            embedding_sampler=gaussian_subset_sampler(params),
            classifier=lambda z: gaussian_response(params, z),
            config=tc,
        )

    if cfg.experiment == "synthetic-counting":
        params = CountingDgpParams()
        Z = sample_counting_dgp(params, cfg.tau_max, rng)
        y = counting_oracle_predictor(Z, rng)
        return run_skit(zip(y, Z[:, unit]), tc)

    j = ctx["concept_idx"][unit]
    if cfg.experiment == "global":
        return run_skit(stream_global(ctx["Z"], ctx["scores"], j, rng), tc)
    if cfg.experiment == "global-cond":
        kde = ctx["kde"]
        stream = stream_global_conditional(ctx["Z"], ctx["scores"], j, rng)
        return run_cskit(stream, lambda zrest, r: kde.sample_zj_given_rest(j, zrest, r), tc)

    m = ctx["Z"].shape[1]
    others = np.array([c for c in range(m) if c != j], dtype=int)
    size = min(cfg.cond_size, others.shape[0])
    S = np.sort(rng.choice(others, size=size, replace=False))
    return run_xskit(ctx["z_obs"], j, S.tolist(), ctx["sampler"], ctx["clf"], tc)


def _init_worker(cfg: ExperimentConfig) -> None:
    _CTX["ctx"] = _build_context(cfg)


def _worker(args) -> tuple[tuple[int, int], TestOutcome]:
    cfg, unit, rep = args
    return (unit, rep), _run_unit(cfg, _CTX["ctx"], unit, rep)


def _resolve_threads(cfg: ExperimentConfig) -> int:
    env = os.environ.get("BETKIT_THREADS")
    if env:
        return max(1, int(env))
    if cfg.threads is not None:
        return max(1, cfg.threads)
    return os.cpu_count() or 1


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run one experiment suite and write its result files.

    Returns a dict with the output paths and the rows written to
    ``results.csv``.
    """
    ctx = _build_context(cfg)
    labels = ctx["labels"]
    n_units = len(labels)
    tasks = [(cfg, u, r) for u in range(n_units) for r in range(cfg.reps)]
    threads = _resolve_threads(cfg)

    outcomes: dict[tuple[int, int], TestOutcome] = {}
    if threads == 1 or len(tasks) == 1:
        for _, u, r in tasks:
            outcomes[(u, r)] = _run_unit(cfg, ctx, u, r)
    else:
        with ProcessPoolExecutor(
            max_workers=min(threads, len(tasks)),
            initializer=_init_worker,
            initargs=(cfg,),
        ) as pool:
            for key, outcome in pool.map(_worker, tasks, chunksize=1):
                outcomes[key] = outcome

    per_unit = [[outcomes[(u, r)] for r in range(cfg.reps)] for u in range(n_units)]
    rates, taus = aggregate_outcomes(per_unit)

    modal_ranks: list[int | None] = [None] * n_units
    if ctx["fdr"]:
        positions: list[list[int | None]] = [[] for _ in range(n_units)]
        for r in range(cfg.reps):
            traj = ConceptTrajectories.from_outcomes(
                [outcomes[(u, r)] for u in range(n_units)], cfg.alpha
            )
            rank = greedy_fdr(traj)
            pos: list[int | None] = [None] * n_units
            for i, (j, _) in enumerate(rank.rejected):
                pos[j] = i + 1
            for u in range(n_units):
                positions[u].append(pos[u])
        for u in range(n_units):
            counts = Counter(positions[u])
            modal_ranks[u] = min(
                counts,
                key=lambda v: (-counts[v], v is None, v if v is not None else 0),
            )

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    lines = ["concept,rejection_rate,mean_normalized_tau,fdr_rank"]
    for u, label in enumerate(labels):
        rank_cell = "" if modal_ranks[u] is None else str(modal_ranks[u])
        rows.append(
            {
                "concept": label,
                "rejection_rate": float(rates[u]),
                "mean_normalized_tau": float(taus[u]),
                "fdr_rank": modal_ranks[u],
            }
        )
        lines.append(f"{label},{float(rates[u])!r},{float(taus[u])!r},{rank_cell}")
    csv_path = out / "results.csv"
    csv_path.write_text("\n".join(lines) + "\n")

    run_meta = {
        "config": dataclasses.asdict(cfg),
        "threads": threads,
        "versions": {
            "betkit": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
        },
    }
    json_path = out / "run.json"
    json_path.write_text(json.dumps(run_meta, indent=2) + "\n")

    svg_path = None
    if cfg.make_plot:
        svg_path = out / "wealth.svg"
        series = [(labels[u], np.asarray(outcomes[(u, 0)].wealth_trajectory)) for u in range(n_units)]
        _wealth_svg(svg_path, series, float(-np.log(cfg.alpha)))

    return {"rows": rows, "csv": csv_path, "run_json": json_path, "svg": svg_path}


def _ranking_from_rows(rows: list[dict]) -> list[str]:
    """Canonical concept order: FDR rank, then rate, then speed, then name."""

    def key(row: dict):
        rank = row["fdr_rank"]
        return (
            rank if rank is not None else float("inf"),
            -row["rejection_rate"],
            row["mean_normalized_tau"],
            row["concept"],
        )

    return [r["concept"] for r in sorted(rows, key=key)]


def _read_results(path) -> list[dict]:
    rows = []
    lines = Path(path).read_text().strip().splitlines()
    for line in lines[1:]:
        concept, rate, tau, rank = line.rsplit(",", 3)
        rows.append(
            {
                "concept": concept,
                "rejection_rate": float(rate),
                "mean_normalized_tau": float(tau),
                "fdr_rank": int(rank) if rank else None,
            }
        )
    return rows


def compare_ranks(results_a, results_b, alpha: float = 0.05, truth=None) -> dict:
    """Agreement report between two results.csv files.

    Emits the weighted Kendall tau in both directions (the measure is
    reference-weighted, hence asymmetric), binarized importance
    agreement at level alpha, and, when a ground-truth concept list is
    supplied, the F1 of important concepts against it.
    """
    rows_a = _read_results(results_a)
    rows_b = _read_results(results_b)
    names_a = {r["concept"] for r in rows_a}
    if names_a != {r["concept"] for r in rows_b}:
        raise ValueError("result files rank different concept sets")
    rank_a = _ranking_from_rows(rows_a)
    rank_b = _ranking_from_rows(rows_b)
    order = sorted(names_a)
    rate_a = [next(r["rejection_rate"] for r in rows_a if r["concept"] == n) for n in order]
    rate_b = [next(r["rejection_rate"] for r in rows_b if r["concept"] == n) for n in order]
    report = {
        "weighted_tau_ab": weighted_kendall_tau(rank_a, rank_b),
        "weighted_tau_ba": weighted_kendall_tau(rank_b, rank_a),
        "importance_agreement": importance_agreement(rate_a, rate_b, alpha),
    }
    if truth is not None:
        truth_set = set(truth)
        unknown = truth_set - names_a
        if unknown:
            raise ValueError(f"ground-truth concepts not present in results: {sorted(unknown)}")
        idx = {n: i for i, n in enumerate(order)}
        pred = {idx[n] for n, rate in zip(order, rate_a) if rate > alpha}
        report["importance_f1"] = importance_f1(pred, {idx[n] for n in truth_set}, len(order))
    return report


def _wealth_svg(path, series: list[tuple[str, np.ndarray]], log_threshold: float) -> None:
    """Minimal standalone SVG line chart of log-wealth trajectories."""
    width, height = 880, 440
    ml, mr, mt, mb = 60, 200, 20, 45
    plot_w, plot_h = width - ml - mr, height - mt - mb
    xmax = max((len(s) for _, s in series), default=1)
    xmax = max(xmax, 2)
    ys = np.concatenate([s for _, s in series if len(s)] + [np.array([0.0, log_threshold])])
    ymin, ymax = float(ys.min()), float(ys.max())
    if ymax - ymin < 1e-9:
        ymax = ymin + 1.0
    pad = 0.05 * (ymax - ymin)
    ymin, ymax = ymin - pad, ymax + pad

    def sx(t: float) -> float:
        return ml + plot_w * t / (xmax - 1)

    def sy(v: float) -> float:
        return mt + plot_h * (1.0 - (v - ymin) / (ymax - ymin))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + plot_h}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt + plot_h}" x2="{ml + plot_w}" y2="{mt + plot_h}" stroke="black"/>',
        f'<line x1="{ml}" y1="{sy(log_threshold):.2f}" x2="{ml + plot_w}" '
        f'y2="{sy(log_threshold):.2f}" stroke="gray" stroke-dasharray="6,4"/>',
        f'<text x="{ml + 4}" y="{sy(log_threshold) - 5:.2f}" fill="gray">log(1/alpha)</text>',
        f'<text x="{ml + plot_w / 2:.0f}" y="{height - 10}" text-anchor="middle">step</text>',
        f'<text x="14" y="{mt + plot_h / 2:.0f}" transform="rotate(-90 14 {mt + plot_h / 2:.0f})" '
        f'text-anchor="middle">log wealth</text>',
    ]
    for i, (label, s) in enumerate(series):
        color = f"hsl({(i * 360) // max(len(series), 1)},65%,40%)"
        if len(s):
            pts = " ".join(f"{sx(t):.2f},{sy(v):.2f}" for t, v in enumerate(s))
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}"/>')
        ly = mt + 16 + 16 * i
        parts.append(f'<rect x="{ml + plot_w + 12}" y="{ly - 9}" width="10" height="10" fill="{color}"/>')
        parts.append(f'<text x="{ml + plot_w + 28}" y="{ly}">{label}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
