"""Sequential kernelized independence testing for concept importance.

Tests are wealth processes: each observation settles a fair bet, wealth
compounds, and crossing 1/alpha rejects with anytime validity.  The
package provides marginal, conditional, and local variants of the test,
conditional samplers, an FDR-controlling ranking of many concepts, and
an experiment harness over synthetic and file-backed datasets.
"""

__version__ = "0.1.0"

from .betting import BettingStrategy, OnsState, WealthState, ons_init, ons_update, wealth_init, wealth_step
from .kernels import KernelSpec, bandwidth_from_history, eval_kernel
from .multiplicity import (
    ConceptTrajectories,
    RankOutput,
    aggregate_outcomes,
    greedy_fdr,
    importance_agreement,
    importance_f1,
    weighted_kendall_tau,
)
from .payoffs import CskitPayoff, SkitPayoff, XskitPayoff
from .samplers import (
    EmbeddingSampler,
    GaussianConditionalParams,
    WeightedKdeSampler,
    gaussian_conditional,
    sample_matching_binary,
)
from .synthetic import (
    COUNTING_CONCEPTS,
    CountingDgpParams,
    GaussianDgpParams,
    counting_conditional_sample,
    counting_oracle_predictor,
    gaussian_response,
    sample_counting_dgp,
    sample_gaussian_dgp,
)
from .testers import Classifier, TestConfig, TestOutcome, run_cskit, run_skit, run_xskit

__all__ = [
    "__version__",
    "BettingStrategy",
    "OnsState",
    "WealthState",
    "ons_init",
    "ons_update",
    "wealth_init",
    "wealth_step",
    "KernelSpec",
    "bandwidth_from_history",
    "eval_kernel",
    "ConceptTrajectories",
    "RankOutput",
    "aggregate_outcomes",
    "greedy_fdr",
    "importance_agreement",
    "importance_f1",
    "weighted_kendall_tau",
    "CskitPayoff",
    "SkitPayoff",
    "XskitPayoff",
    "EmbeddingSampler",
    "GaussianConditionalParams",
    "WeightedKdeSampler",
    "gaussian_conditional",
    "sample_matching_binary",
    "COUNTING_CONCEPTS",
    "CountingDgpParams",
    "GaussianDgpParams",
    "counting_conditional_sample",
    "counting_oracle_predictor",
    "gaussian_response",
    "sample_counting_dgp",
    "sample_gaussian_dgp",
    "Classifier",
    "TestConfig",
    "TestOutcome",
    "run_cskit",
    "run_skit",
    "run_xskit",
]
