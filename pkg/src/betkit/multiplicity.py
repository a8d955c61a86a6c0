"""Multiple-testing post-processing and rank-agreement metrics.

Running one wealth process per concept yields m anytime-valid e-values.
`greedy_fdr` turns them into an importance ranking with false discovery
rate control: round s rejects the concept whose wealth first crosses
m/(alpha*s), so thresholds relax as discoveries accumulate and the
procedure is self-consistent in the e-value sense (every rejected
concept's wealth at its adjusted time is at least m/(alpha*|S|)).

The remaining helpers aggregate repeated test outcomes and compare
rankings across models: a rank-weighted Kendall tau that emphasizes
agreement at the top, plus binarized importance agreement and F1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .testers import TestOutcome

__all__ = [
    "ConceptTrajectories",
    "RankOutput",
    "greedy_fdr",
    "aggregate_outcomes",
    "weighted_kendall_tau",
    "importance_agreement",
    "importance_f1",
]


@dataclass(frozen=True)
class ConceptTrajectories:
    """Per-concept log-wealth series feeding the FDR post-processor.

    Series may have different lengths because tests stop at different
    times; a concept's wealth is frozen once its series ends.
    """

    log_wealth: tuple[np.ndarray, ...]
    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if len(self.log_wealth) == 0:
            raise ValueError("need at least one concept trajectory")

    @property
    def m(self) -> int:
        return len(self.log_wealth)

    @classmethod
    def from_outcomes(cls, outcomes: Sequence[TestOutcome], alpha: float) -> "ConceptTrajectories":
        return cls(
            log_wealth=tuple(np.asarray(o.wealth_trajectory, dtype=float) for o in outcomes),
            alpha=alpha,
        )


@dataclass(frozen=True)
class RankOutput:
    """Greedy FDR result: rejected concepts in acceptance order.

    ``rejected`` pairs each concept with its adjusted rejection time
    (1-based step of the threshold crossing); adjusted times need not
    be increasing because later rounds use smaller thresholds.
    """

    rejected: tuple[tuple[int, int], ...]
    status: tuple[bool, ...]

    @property
    def rejected_set(self) -> frozenset[int]:
        return frozenset(j for j, _ in self.rejected)


def greedy_fdr(traj: ConceptTrajectories) -> RankOutput:
    """Rank concepts by repeatedly rejecting the fastest threshold crosser.

    Round s uses threshold m/(alpha*s) on the wealth scale.  Among
    still-unrejected concepts, the one whose wealth first crossed the
    threshold is rejected; ties break by larger wealth at the crossing
    time, then by lower concept index.  Stops at the first round with
    no crosser.
    """
    m = traj.m
    series = [np.asarray(s, dtype=float) for s in traj.log_wealth]
    remaining = list(range(m))
    rejected: list[tuple[int, int]] = []
    for s in range(1, m + 1):
        log_thr = math.log(m) - math.log(traj.alpha) - math.log(s)
        best_key = None
        best = None
        for j in remaining:
            hits = np.flatnonzero(series[j] >= log_thr)
            if hits.shape[0] == 0:
                continue
            tau = int(hits[0]) + 1
            key = (tau, -float(series[j][hits[0]]), j)
            if best_key is None or key < best_key:
                best_key = key
                best = (j, tau)
        if best is None:
            break
        rejected.append(best)
        remaining.remove(best[0])
    status = tuple(j not in remaining for j in range(m))
    return RankOutput(rejected=tuple(rejected), status=status)


def aggregate_outcomes(
    outcomes: Sequence[Sequence[TestOutcome]],
) -> tuple[np.ndarray, np.ndarray]:
    """Per-concept rejection rate and mean normalized rejection time.

    ``outcomes[j]`` holds the repetitions for concept j.  Non-rejecting
    runs contribute a normalized time of 1.
    """
    rates = np.array([np.mean([o.rejected for o in reps]) for reps in outcomes])
    taus = np.array([np.mean([o.normalized_tau for o in reps]) for reps in outcomes])
    return rates, taus


def weighted_kendall_tau(reference_rank: Sequence, other_rank: Sequence) -> float:
    """Top-weighted rank agreement in [-1, 1]; not symmetric.

    Pairs are weighted by 1/(r+1) + 1/(r'+1) with 0-based ranks taken
    from the reference ranking, so disagreement near the top of the
    reference costs more.  +1 for identical rankings, -1 for a full
    reversal.
    """
    ref = list(reference_rank)
    other = list(other_rank)
    if len(ref) != len(other):
        raise ValueError("rankings must have the same length")
    if set(ref) != set(other):
        raise ValueError("rankings must order the same items")
    if len(ref) < 2:
        return 1.0
    pos_other = {item: i for i, item in enumerate(other)}
    num = 0.0
    den = 0.0
    for i in range(len(ref)):
        for j in range(i + 1, len(ref)):
            w = 1.0 / (i + 1.0) + 1.0 / (j + 1.0)
            agree = 1.0 if pos_other[ref[i]] < pos_other[ref[j]] else -1.0
            num += w * agree
            den += w
    return num / den


def importance_agreement(rates_a, rates_b, alpha: float) -> float:
    """Fraction of concepts whose thresholded importance labels agree."""
    a = np.asarray(rates_a, dtype=float)
    b = np.asarray(rates_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("rate vectors must have the same length")
    return float(np.mean((a > alpha) == (b > alpha)))


def importance_f1(predicted_important: Iterable, ground_truth_important: Iterable, m: int) -> float:
    """F1 of predicted vs ground-truth important concepts out of m.

    Returns 0 when precision and recall are both zero (including the
    degenerate case of two empty sets).
    """
    pred = set(predicted_important)
    truth = set(ground_truth_important)
    for s in (pred, truth):
        bad = [x for x in s if not 0 <= int(x) < m]
        if bad:
            raise ValueError(f"concept indices {bad} outside universe of size {m}")
    overlap = len(pred & truth)
    if overlap == 0:
        return 0.0
    return 2.0 * overlap / (len(pred) + len(truth))
