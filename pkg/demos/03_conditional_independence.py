"""Conditional independence testing and why the kernel choice matters.

Marginal dependence is often inherited: Z1 drives Z3, Z3 drives Y, so Y
and Z1 look associated even if Y never reads Z1 directly.  The
conditional test (c-SKIT) asks the sharper question: is Y independent
of Z1 given the remaining concepts?  Each real observation is paired
with a counterfactual where Z1 is redrawn from its conditional law
given the rest; under conditional independence the two histories are
exchangeable and the witness payoff is fair.

The demo also contrasts kernels.  Y = sigmoid(beta1 * z1 + z2 * z3 + z3)
touches Z1 only through a nonlinearity inside a bounded response, and a
linear witness sees first moments only, so it stays blind no matter how
large beta1 is; the rbf kernel is characteristic and catches the signal.
"""

import numpy as np

from betkit.kernels import KernelSpec
from betkit.synthetic import GaussianDgpParams, gaussian_z1_sampler, sample_gaussian_dgp
from betkit.testers import TestConfig, run_cskit

RBF = KernelSpec(family="rbf", rule="quantile", q=0.5)
LINEAR = KernelSpec(family="linear", rule="fixed", sigma=1.0)


def test_once(beta1: float, kernel: KernelSpec, rep: int):
    params = GaussianDgpParams(beta1=beta1, beta2=1.0, beta3=1.0)
    ss = np.random.SeedSequence(entropy=303, spawn_key=(rep,))
    data_ss, test_ss = ss.spawn(2)
    Z, Y = sample_gaussian_dgp(params, 2000, np.random.default_rng(data_ss))
    stream = ((Y[i], Z[i, 0], Z[i, 1:]) for i in range(2000))
    config = TestConfig(
        alpha=0.05,
        tau_max=1000,
        kernel_y=kernel,
        kernel_z=kernel,
        kernel_zrest=kernel,
        seed=int(test_ss.generate_state(1, np.uint64)[0]),
    )
    return run_cskit(stream, gaussian_z1_sampler(params), config)


def main() -> None:
    reps = 10
    print(f"c-SKIT for Y vs Z1 given (Z2, Z3), {reps} repetitions per setting\n")
    print(f"{'beta1':>6}  {'rbf rate':>9}  {'linear rate':>12}")
    for beta1 in (0.0, 1.0, 2.0):
        rbf_rate = np.mean([test_once(beta1, RBF, r).rejected for r in range(reps)])
        lin_rate = np.mean([test_once(beta1, LINEAR, r).rejected for r in range(reps)])
        print(f"{beta1:>6.1f}  {rbf_rate:>9.2f}  {lin_rate:>12.2f}")
    print(
        "\nThe rbf witness turns the conditional signal into capital as soon"
        "\nas beta1 is real.  The linear row does not move at all: a witness"
        "\nthat only compares means faces the exact same fair game at every"
        "\nbeta1, so its rate just sits at the noise floor of 10 repetitions."
    )


if __name__ == "__main__":
    main()
