"""Drivers for the three sequential independence tests.

Each driver wires a data source, a payoff, and a wealth process into a
single anytime-valid test: marginal importance (`run_skit`), global
conditional importance (`run_cskit`), and local conditional importance
at a fixed input (`run_xskit`).  By default all three stop as soon as
the wealth crosses 1/alpha or the sample budget runs out; with
``stop_at_rejection=False`` they bet through the whole budget, which
multiplicity post-processing needs because its per-round thresholds
sit above 1/alpha.  Either way the reported rejection and its time
refer to the first crossing.

The sample budget `tau_max` counts observations consumed, not steps:
the marginal test eats two per step, the conditional test one, and the
local test one sampler-draw pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import softmax

from .betting import BettingStrategy, wealth_init, wealth_step
from .kernels import KernelSpec
from .payoffs import CskitPayoff, SkitPayoff, XskitPayoff

__all__ = [
    "TestConfig",
    "TestOutcome",
    "Classifier",
    "run_skit",
    "run_cskit",
    "run_xskit",
]


@dataclass(frozen=True)
class TestConfig:
    """Shared knobs for a single test run."""

    alpha: float = 0.05
    tau_max: int = 1000
    kernel_y: KernelSpec = field(default_factory=KernelSpec)
    kernel_z: KernelSpec = field(default_factory=KernelSpec)
    kernel_zrest: KernelSpec = field(default_factory=KernelSpec)
    strategy: BettingStrategy = field(default_factory=BettingStrategy)
    seed: int = 0
    stop_at_rejection: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.tau_max < 2:
            raise ValueError("tau_max must be at least 2")


@dataclass(frozen=True)
class TestOutcome:
    """Result of one sequential test run.

    ``samples_used`` counts observations consumed in total, while
    ``normalized_tau`` divides the samples consumed up to the first
    threshold crossing by the budget; it is 1 when the test never
    rejected, so a value of 1 reads as "failed to reject within the
    budget".  The two notions coincide unless the run bets through
    the budget after rejecting.
    """

    rejected: bool
    samples_used: int
    normalized_tau: float
    wealth_trajectory: tuple[float, ...]


@dataclass(frozen=True)
class Classifier:
    """Linear zero-shot head scoring embeddings for one target class."""

    weights: np.ndarray
    class_names: tuple[str, ...]
    score_mode: str = "logit"
    temperature: float = 1.0
    target_class: int = 0

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != len(self.class_names):
            raise ValueError("weights must be (k, d) with one row per class")
        if self.score_mode not in ("logit", "softmax"):
            raise ValueError(f"unknown score mode {self.score_mode!r}")
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")
        if not 0 <= self.target_class < w.shape[0]:
            raise ValueError("target_class out of range")

    def score(self, h) -> float:
        """Score one embedding: logit or softmax probability of the target."""
        logits = np.asarray(self.weights, dtype=float) @ np.asarray(h, dtype=float)
        if self.score_mode == "logit":
            return float(logits[self.target_class])
        return float(softmax(logits / self.temperature)[self.target_class])


def _finish(
    wealth, samples_used: int, tau_max: int, trajectory: list[float], samples_per_step: int
) -> TestOutcome:
    rejected = wealth.rejected
    normalized = wealth.rejected_at * samples_per_step / tau_max if rejected else 1.0
    return TestOutcome(
        rejected=rejected,
        samples_used=samples_used,
        normalized_tau=normalized,
        wealth_trajectory=tuple(trajectory),
    )


def run_skit(stream: Iterable, config: TestConfig) -> TestOutcome:
    """Sequential marginal independence test on a stream of (y, z) pairs.

    Consumes two pairs per step; the payoff contrasts them against
    their z-swapped versions.  Stops at rejection or when fewer than
    two samples remain within the budget.
    """
    payoff = SkitPayoff(config.kernel_y, config.kernel_z)
    wealth = wealth_init(config.alpha, config.strategy)
    trajectory: list[float] = []
    samples = 0
    it = iter(stream)
    while samples + 2 <= config.tau_max:
        pair = list(_take(it, 2))
        if len(pair) < 2:
            break
        samples += 2
        kappa = payoff.step_kappa(pair[0], pair[1])
        wealth = wealth_step(wealth, kappa)
        trajectory.append(wealth.log_wealth)
        if wealth.rejected and config.stop_at_rejection:
            break
    return _finish(wealth, samples, config.tau_max, trajectory, samples_per_step=2)


def _take(it, k: int):
    for _ in range(k):
        try:
            yield next(it)
        except StopIteration:
            return


def run_cskit(
    stream: Iterable,
    conditional_sampler: Callable[[np.ndarray, np.random.Generator], float],
    config: TestConfig,
) -> TestOutcome:
    """Sequential conditional independence test on (y, z_j, z_rest) triples.

    Each step draws a counterfactual z_j from the injected sampler at
    the observed z_rest and bets on the witness difference between the
    observed and counterfactual histories.
    """
    payoff = CskitPayoff(config.kernel_y, config.kernel_z, config.kernel_zrest)
    wealth = wealth_init(config.alpha, config.strategy)
    rng = np.random.default_rng(config.seed)
    trajectory: list[float] = []
    samples = 0
    for obs in stream:
        if samples + 1 > config.tau_max:
            break
        samples += 1
        y, zj, zrest = obs
        zj_tilde = conditional_sampler(np.asarray(zrest, dtype=float), rng)
        kappa = payoff.step_kappa((y, zj, zrest), zj_tilde)
        wealth = wealth_step(wealth, kappa)
        trajectory.append(wealth.log_wealth)
        if wealth.rejected and config.stop_at_rejection:
            break
    return _finish(wealth, samples, config.tau_max, trajectory, samples_per_step=1)


def run_xskit(
    z_obs,
    j: int,
    S: Sequence[int],
    embedding_sampler,
    classifier,
    config: TestConfig,
) -> TestOutcome:
    """Local conditional importance test of concept j at a fixed input.

    Per step, one embedding is sampled conditioned on the concepts
    S u {j} at their observed values and one conditioned on S alone;
    both are scored and the payoff bets on the score distributions
    differing.  The budget counts sampler-draw pairs.

    ``embedding_sampler`` is either an object exposing
    ``sample_embedding_given_zC(C, zC, rng)`` or a plain callable with
    that signature; ``classifier`` is either a `Classifier` or a plain
    callable mapping an embedding to a score.
    """
    z_obs = np.asarray(z_obs, dtype=float)
    S = sorted(int(s) for s in S)
    if j in S:
        raise ValueError("tested concept must not belong to the conditioning set")
    c_test = np.array(sorted(S + [int(j)]), dtype=int)
    c_null = np.array(S, dtype=int)

    draw = getattr(embedding_sampler, "sample_embedding_given_zC", embedding_sampler)
    score = classifier.score if isinstance(classifier, Classifier) else classifier

    payoff = XskitPayoff(config.kernel_y)
    wealth = wealth_init(config.alpha, config.strategy)
    rng = np.random.default_rng(config.seed)
    trajectory: list[float] = []
    samples = 0
    while samples + 1 <= config.tau_max:
        samples += 1
        h_test = draw(c_test, z_obs[c_test], rng)
        h_null = draw(c_null, z_obs[c_null], rng)
        kappa = payoff.step_kappa(score(h_test), score(h_null))
        wealth = wealth_step(wealth, kappa)
        trajectory.append(wealth.log_wealth)
        if wealth.rejected and config.stop_at_rejection:
            break
    return _finish(wealth, samples, config.tau_max, trajectory, samples_per_step=1)
