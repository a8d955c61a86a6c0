"""The full dataset workflow, from manifest to rank comparison.

Real runs start from a directory of NPY arrays plus a JSON manifest:
unit-normalized embeddings, a concept dictionary, and a zero-shot
classifier head.  Concept semantics are the cosine similarities between
embeddings and concept vectors, and every test mode consumes streams
built from those projections.

This demo fabricates two such bundles that share embeddings and
concepts but carry different classifier heads: head A mostly reads
concept_00 with a side of concept_01, head B reads concept_00 with a
side of concept_02.  Running the dataset modes recovers exactly that
structure, and the comparison report quantifies how much the two heads
agree.  Everything here has a command line twin: `betkit global
--manifest ... --out ...` and friends write the same results.csv files,
and `betkit compare` prints the same report.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from betkit.datastore import save_dataset
from betkit.harness import ExperimentConfig, compare_ranks, run_experiment

D, N, M = 24, 1200, 8


def build_bundle(out_dir: Path, side_concept: int) -> Path:
    """Bundle whose target head reads concept 0 plus one side concept."""
    rng = np.random.default_rng(7)
    H = rng.standard_normal((N, D))
    H /= np.linalg.norm(H, axis=1, keepdims=True)
    basis, _ = np.linalg.qr(rng.standard_normal((D, D)))
    C = basis[:, :M]
    head = 1.5 * C[:, 0] + 0.8 * C[:, side_concept] + 0.2 * rng.standard_normal(D)
    other = rng.standard_normal(D)
    W = np.stack([head / np.linalg.norm(head), other / np.linalg.norm(other)])
    names = [f"concept_{i:02d}" for i in range(M)]
    return save_dataset(out_dir, H, C, names, W, ["target", "background"])


def run_mode(manifest: Path, experiment: str, out: Path, **extra) -> list[dict]:
    cfg = ExperimentConfig(
        experiment=experiment,
        manifest=str(manifest),
        reps=2,
        tau_max=600,
        seed=17,
        threads=1,
        out_dir=str(out),
        **extra,
    )
    return run_experiment(cfg)["rows"]


def print_rows(rows: list[dict]) -> None:
    print(f"  {'concept':>12}  {'rate':>5}  {'mean tau':>8}  {'rank':>4}")
    for row in rows:
        rank = "-" if row["fdr_rank"] is None else row["fdr_rank"]
        print(
            f"  {row['concept']:>12}  {row['rejection_rate']:>5.2f}  "
            f"{row['mean_normalized_tau']:>8.2f}  {rank:>4}"
        )


def main() -> None:
    root = Path(tempfile.mkdtemp(prefix="betkit-demo-"))
    manifest_a = build_bundle(root / "model_a", side_concept=1)
    manifest_b = build_bundle(root / "model_b", side_concept=2)

    rows = run_mode(manifest_a, "global", root / "a_global")
    print("global mode, head A (reads concept_00 and concept_01):\n")
    print_rows(rows)

    run_mode(manifest_a, "global-cond", root / "a_cond")
    run_mode(manifest_a, "local", root / "a_local", sample_id="0")
    print("\nconditional and local modes wrote", root / "a_cond", "and", root / "a_local")

    rows = run_mode(manifest_b, "global", root / "b_global")
    print("\nglobal mode, head B (reads concept_00 and concept_02):\n")
    print_rows(rows)

    report = compare_ranks(root / "a_global" / "results.csv", root / "b_global" / "results.csv")
    print("\nrank agreement between the two heads:\n")
    print(json.dumps(report, indent=2))
    print(
        "\nBoth heads put concept_00 on top, so the top-weighted taus stay"
        "\nwell above zero, but the swapped side concepts keep them below"
        "\none and pull the binarized importance agreement to 6 of 8."
    )


if __name__ == "__main__":
    main()
