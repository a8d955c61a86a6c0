"""Local testing: does a concept matter for this one sample?

Global tests average over the data distribution.  The local test
(x-SKIT) fixes a single observation and asks whether the model's
prediction distribution changes when we additionally condition on the
concept under scrutiny.  It bets on the gap between two streams of
sampled predictions: one conditioned on the concept and a background
set, one conditioned on the background set alone.

In the Gaussian generator Y = sigmoid(z1 + z2 * z3 + z3), so concept Z2
matters for a sample exactly when that sample's z3 is nonzero, and the
sign of z3 flips the direction of the effect.  The payoff is symmetric,
so both directions are caught without choosing a side in advance.
"""

import numpy as np

from betkit.kernels import KernelSpec
from betkit.synthetic import GaussianDgpParams, gaussian_response, gaussian_subset_sampler
from betkit.testers import TestConfig, run_xskit


def test_once(z3: float, rep: int):
    params = GaussianDgpParams(beta1=1.0, beta2=1.0, beta3=1.0)
    seed = int(np.random.SeedSequence(entropy=404, spawn_key=(rep,)).generate_state(1)[0])
    config = TestConfig(
        alpha=0.05,
        tau_max=1000,
        kernel_y=KernelSpec(family="rbf", rule="quantile", q=0.5),
        seed=seed,
    )
    z_obs = np.array([params.mu1, 1.0, z3])
    return run_xskit(
        z_obs,
        j=1,
        S=[2],
        embedding_sampler=gaussian_subset_sampler(params),
        classifier=lambda z: gaussian_response(params, z),
        config=config,
    )


def main() -> None:
    reps = 10
    print(f"x-SKIT for concept Z2 at a single observation, {reps} repetitions\n")
    print(f"{'sample z3':>10}  {'rejection rate':>14}  {'mean normalized tau':>20}")
    for z3 in (-0.5, 0.0, 0.5):
        outs = [test_once(z3, rep) for rep in range(reps)]
        rate = np.mean([o.rejected for o in outs])
        tau = np.mean([o.normalized_tau for o in outs])
        print(f"{z3:>10.1f}  {rate:>14.2f}  {tau:>20.2f}")
    print(
        "\nAt z3 = 0 the interaction term is dead and the test stays quiet;"
        "\nshifting z3 to either side makes Z2 locally important, and the"
        "\ntwo-sided payoff rejects fast in both directions."
    )


if __name__ == "__main__":
    main()
