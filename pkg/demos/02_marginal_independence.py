"""Sequential kernelized independence testing on a stream of pairs.

Is a model prediction Y independent of a concept value Z?  The
sequential kernelized independence test (SKIT) consumes the stream two
pairs at a time: swapping the concept values between two pairs leaves
the joint distribution unchanged exactly when Y and Z are independent,
so the difference of kernel witness values is a fair payoff to bet on.

Here Y = sigmoid(z1 + beta2 * z2 * z3 + z3) from the Gaussian
generator, and we test Y against Z2 for a few values of beta2.  At
beta2 = 0 the pair is independent (validity case); as beta2 grows the
dependence gets easier to catch and the rejection time shrinks.
"""

import numpy as np

from betkit.kernels import KernelSpec
from betkit.synthetic import GaussianDgpParams, sample_gaussian_dgp
from betkit.testers import TestConfig, run_skit


def test_once(beta2: float, rep: int):
    params = GaussianDgpParams(beta1=1.0, beta2=beta2, beta3=1.0)
    ss = np.random.SeedSequence(entropy=202, spawn_key=(rep,))
    data_ss, test_ss = ss.spawn(2)
    Z, Y = sample_gaussian_dgp(params, 2000, np.random.default_rng(data_ss))
    config = TestConfig(
        alpha=0.05,
        tau_max=1000,
        kernel_y=KernelSpec(family="rbf", rule="quantile", q=0.5),
        kernel_z=KernelSpec(family="rbf", rule="quantile", q=0.5),
        seed=int(test_ss.generate_state(1, np.uint64)[0]),
    )
    return run_skit(zip(Y, Z[:, 1]), config)


def main() -> None:
    reps = 20
    print(f"SKIT on (Y, Z2) pairs, {reps} repetitions per setting\n")
    print(f"{'beta2':>6}  {'rejection rate':>14}  {'mean normalized tau':>20}")
    for beta2 in (0.0, 0.5, 1.0, 2.0):
        outs = [test_once(beta2, rep) for rep in range(reps)]
        rate = np.mean([o.rejected for o in outs])
        tau = np.mean([o.normalized_tau for o in outs])
        print(f"{beta2:>6.1f}  {rate:>14.2f}  {tau:>20.2f}")
    print(
        "\nbeta2 = 0 is the null: rejections stay near zero at any budget."
        "\nStronger dependence is caught in a smaller fraction of the budget."
    )


if __name__ == "__main__":
    main()
