"""Ranking many concepts with false discovery rate control.

Testing six concepts at level alpha each would let errors pile up.
Instead, each concept gets its own wealth process and the greedy
post-processor rejects them in rounds: round s admits the concept whose
wealth first crossed m / (alpha * s).  Earlier rounds face stricter
thresholds, so the acceptance order doubles as an importance ranking,
and the e-value structure keeps the false discovery rate below alpha.

The scene generator counts colored digits: the predictor reads the
number of red threes, which is driven by the orange threes and green
fives, which in turn lean on the blue zeros.  Blue twos and purple
sevens are pure bystanders.  Wealth processes must run through the full
budget here because the round thresholds sit above the single-test one.
"""

import numpy as np

from betkit.kernels import KernelSpec
from betkit.multiplicity import ConceptTrajectories, greedy_fdr
from betkit.synthetic import (
    COUNTING_CONCEPTS,
    CountingDgpParams,
    counting_oracle_predictor,
    sample_counting_dgp,
)
from betkit.testers import TestConfig, run_skit


def main() -> None:
    params = CountingDgpParams()
    tau_max = 800
    outs = []
    for j in range(6):
        ss = np.random.SeedSequence(entropy=505, spawn_key=(j,))
        data_ss, test_ss = ss.spawn(2)
        Z = sample_counting_dgp(params, tau_max, np.random.default_rng(data_ss))
        y = counting_oracle_predictor(Z, np.random.default_rng(data_ss))
        config = TestConfig(
            alpha=0.05,
            tau_max=tau_max,
            kernel_y=KernelSpec(family="rbf", rule="quantile", q=0.5),
            kernel_z=KernelSpec(family="rbf", rule="quantile", q=0.5),
            seed=int(test_ss.generate_state(1, np.uint64)[0]),
            stop_at_rejection=False,
        )
        outs.append(run_skit(zip(y, Z[:, j]), config))

    print("per-concept outcomes (marginal test against the prediction):\n")
    for name, out in zip(COUNTING_CONCEPTS, outs):
        peak = max(out.wealth_trajectory)
        flag = f"rejected at {out.normalized_tau:.2f} of budget" if out.rejected else "no rejection"
        print(f"  {name:>13}: peak log-wealth {peak:6.2f}, {flag}")

    ranked = greedy_fdr(ConceptTrajectories.from_outcomes(outs, alpha=0.05))
    print("\ngreedy ranking under false discovery rate control:\n")
    for position, (j, tau) in enumerate(ranked.rejected, start=1):
        print(f"  {position}. {COUNTING_CONCEPTS[j]} (threshold crossed at step {tau})")
    left_out = [COUNTING_CONCEPTS[j] for j in range(6) if j not in ranked.rejected_set]
    print(f"\n  outside the ranking: {', '.join(left_out)}")
    print(
        "\nThe bystander counts stay out, and the ranking follows the"
        "\ncausal proximity of each concept to what the predictor reads."
    )


if __name__ == "__main__":
    main()
