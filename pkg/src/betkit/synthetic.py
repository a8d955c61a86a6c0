"""Synthetic data generators with known ground-truth structure.

Two generators anchor the validity and power tests because their
(conditional) independence structure is known exactly:

* The Gaussian generator has three latent concepts, two of them
  correlated, and a sigmoid response with tunable coefficients.  Its
  conditionals are Gaussian in closed form.
* The counting generator mimics a scene with six colored-digit counts
  whose dependency graph is small enough to enumerate, so conditional
  laws are computed by Bayes' rule over 216 joint states.

Both expose exact conditional samplers, which lets conditional tests be
validated free of sampler approximation error, plus an oracle predictor
for the counting response that stands in for a near-perfect model.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import expit

from .samplers import GaussianConditionalParams, gaussian_conditional

__all__ = [
    "GaussianDgpParams",
    "sample_gaussian_dgp",
    "gaussian_response",
    "gaussian_z1_sampler",
    "gaussian_subset_sampler",
    "CountingDgpParams",
    "COUNTING_CONCEPTS",
    "RED_THREES",
    "sample_counting_dgp",
    "counting_conditional_sample",
    "counting_rest_sampler",
    "counting_oracle_predictor",
]


@dataclass(frozen=True)
class GaussianDgpParams:
    """Coefficients and shape parameters of the Gaussian generator.

    Z1 ~ N(mu1, sigma1^2), Z2 ~ N(mu2, sigma2^2) independent, Z3 | Z1 ~
    N(Z1, sigma3^2), and Y = sigmoid(beta1*z1 + beta2*z2*z3 + beta3*z3)
    plus N(0, sigma0^2) noise.
    """

    beta1: float = 0.0
    beta2: float = 0.0
    beta3: float = 0.0
    mu1: float = 1.0
    sigma1: float = 1.0
    mu2: float = -1.0
    sigma2: float = 1.0
    sigma3: float = 1.0
    sigma0: float = 0.01

    def __post_init__(self) -> None:
        for name in ("sigma1", "sigma2", "sigma3", "sigma0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def z1_conditional(self) -> GaussianConditionalParams:
        """Parameters of the analytic posterior of Z1 given Z3."""
        return GaussianConditionalParams(mu1=self.mu1, sigma1=self.sigma1, sigma3=self.sigma3)


def sample_gaussian_dgp(
    params: GaussianDgpParams, n: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Draw n rows of concepts Z (n x 3) and noisy responses Y (n,)."""
    z1 = params.mu1 + params.sigma1 * rng.standard_normal(n)
    z2 = params.mu2 + params.sigma2 * rng.standard_normal(n)
    z3 = z1 + params.sigma3 * rng.standard_normal(n)
    z = np.column_stack([z1, z2, z3])
    y = gaussian_response(params, z) + params.sigma0 * rng.standard_normal(n)
    return z, y


def gaussian_response(params: GaussianDgpParams, z) -> np.ndarray | float:
    """Noiseless response sigmoid(beta1*z1 + beta2*z2*z3 + beta3*z3).

    Accepts a single 3-vector or an (n, 3) batch.
    """
    zv = np.asarray(z, dtype=float)
    arg = (
        params.beta1 * zv[..., 0]
        + params.beta2 * zv[..., 1] * zv[..., 2]
        + params.beta3 * zv[..., 2]
    )
    out = expit(arg)
    return float(out) if out.ndim == 0 else out


def gaussian_z1_sampler(params: GaussianDgpParams):
    """Exact conditional sampler for Z1 given (z2, z3), as a callable.

    Z2 carries no information about Z1, so the draw uses the analytic
    posterior given z3 alone.  The returned callable has the signature
    (zrest, rng) -> float expected by the conditional test runner, with
    zrest ordered (z2, z3).
    """
    cond = params.z1_conditional()

    def draw(zrest, rng: np.random.Generator) -> float:
        zrest = np.asarray(zrest, dtype=float)
        mean, var = gaussian_conditional(cond, float(zrest[1]))
        return mean + np.sqrt(var) * rng.standard_normal()

    return draw


def gaussian_subset_sampler(params: GaussianDgpParams):
    """Exact sampler for the full concept vector given any subset.

    Returns a callable (C, zC, rng) -> 3-vector drawing from
    P(Z | Z_C = zC).  Only Z1 and Z3 are coupled, so each case reduces
    to a univariate Gaussian; unconditioned coordinates are drawn in
    index order for reproducibility.
    """
    cond13 = params.z1_conditional()

    def draw(C, zC, rng: np.random.Generator) -> np.ndarray:
        C = np.asarray(C, dtype=int)
        zC = np.asarray(zC, dtype=float)
        if zC.shape != (C.shape[0],):
            raise ValueError("zC length must match C")
        fixed = dict(zip(C.tolist(), zC.tolist()))
        out = np.empty(3, dtype=float)
        if 0 in fixed:
            out[0] = fixed[0]
        elif 2 in fixed:
            mean, var = gaussian_conditional(cond13, fixed[2])
            out[0] = mean + np.sqrt(var) * rng.standard_normal()
        else:
            out[0] = params.mu1 + params.sigma1 * rng.standard_normal()
        if 1 in fixed:
            out[1] = fixed[1]
        else:
            out[1] = params.mu2 + params.sigma2 * rng.standard_normal()
        if 2 in fixed:
            out[2] = fixed[2]
        else:
            out[2] = out[0] + params.sigma3 * rng.standard_normal()
        return out

    return draw


# ---------------------------------------------------------------------------
# Counting generator: six colored-digit counts with a small dependency graph.

COUNTING_CONCEPTS = (
    "blue zeros",
    "orange threes",
    "green fives",
    "red threes",
    "blue twos",
    "purple sevens",
)

BLUE_ZEROS, ORANGE_THREES, GREEN_FIVES, RED_THREES, BLUE_TWOS, PURPLE_SEVENS = range(6)

# P(N_fives = f | N_zeros = a): row a, column f-1 over support {1, 2, 3}.
_FIVES_TABLE = np.array(
    [
        [3 / 4, 1 / 8, 1 / 8],
        [1 / 8, 3 / 4, 1 / 8],
        [1 / 8, 1 / 8, 3 / 4],
    ]
)


@dataclass(frozen=True)
class CountingDgpParams:
    """Flip probability of the red-threes gate, in (0.5, 1)."""

    alpha_flip: float = 0.9

    def __post_init__(self) -> None:
        if not 0.5 < self.alpha_flip < 1.0:
            raise ValueError("alpha_flip must lie in (0.5, 1)")


def _round_count(value) -> np.ndarray:
    """Recover the integer count under half-up rounding of the dither."""
    return np.floor(np.asarray(value, dtype=float) + 0.5).astype(int)


def sample_counting_dgp(
    params: CountingDgpParams, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw n rows of the six dithered counts.

    Columns follow COUNTING_CONCEPTS order.  Counts are drawn per the
    dependency graph (fives depend on zeros; red depends on the
    orange*fives gate), then independent U(-0.5, 0.5) dither is added.
    """
    n_zeros = rng.integers(0, 3, size=n)
    n_orange = rng.integers(0, 3, size=n)
    cum = np.cumsum(_FIVES_TABLE, axis=1)
    n_fives = 1 + (rng.random(n)[:, None] > cum[n_zeros]).sum(axis=1)
    n_twos = rng.integers(1, 3, size=n)
    n_sevens = rng.integers(1, 3, size=n)
    p_red = np.where(n_orange * n_fives >= 3, params.alpha_flip, 1.0 - params.alpha_flip)
    n_red = 2 + (rng.random(n) < p_red).astype(int)
    counts = np.column_stack([n_zeros, n_orange, n_fives, n_red, n_twos, n_sevens])
    return counts + rng.uniform(-0.5, 0.5, size=(n, 6))


@lru_cache(maxsize=8)
def _counting_joint(alpha_flip: float) -> tuple[np.ndarray, np.ndarray]:
    """All 216 joint count states and their probabilities."""
    zeros = np.arange(3)
    orange = np.arange(3)
    fives = np.arange(1, 4)
    red = np.arange(2, 4)
    twos = np.arange(1, 3)
    sevens = np.arange(1, 3)
    grids = np.meshgrid(zeros, orange, fives, red, twos, sevens, indexing="ij")
    states = np.column_stack([g.ravel() for g in grids])
    a, b, f, r = states[:, 0], states[:, 1], states[:, 2], states[:, 3]
    p_red3 = np.where(b * f >= 3, alpha_flip, 1.0 - alpha_flip)
    probs = (
        (1.0 / 3.0)
        * (1.0 / 3.0)
        * _FIVES_TABLE[a, f - 1]
        * np.where(r == 3, p_red3, 1.0 - p_red3)
        * 0.5
        * 0.5
    )
    return states, probs


def counting_conditional_sample(
    params: CountingDgpParams,
    j: int,
    given: dict[int, float],
    rng: np.random.Generator,
) -> float:
    """Exact draw from P(Z_j | conditioning concepts), dither included.

    ``given`` maps concept indices to observed (dithered) values; the
    underlying counts are recovered by rounding, the posterior over the
    count of concept j follows from Bayes' rule on the enumerated
    joint, and the returned value carries fresh U(-0.5, 0.5) dither.
    """
    if not 0 <= j < 6:
        raise ValueError(f"concept index {j} out of range")
    if j in given:
        raise ValueError("cannot condition on the sampled concept itself")
    states, probs = _counting_joint(params.alpha_flip)
    mask = np.ones(states.shape[0], dtype=bool)
    for k, value in given.items():
        if not 0 <= int(k) < 6:
            raise ValueError(f"concept index {k} out of range")
        mask &= states[:, int(k)] == _round_count(value)
    total = probs[mask].sum()
    if total <= 0.0:
        raise ValueError("conditioning event has probability zero")
    values, inverse = np.unique(states[mask, j], return_inverse=True)
    posterior = np.bincount(inverse, weights=probs[mask]) / total
    count = rng.choice(values, p=posterior)
    return float(count + rng.uniform(-0.5, 0.5))


def counting_rest_sampler(params: CountingDgpParams, j: int):
    """Exact conditional sampler of concept j given all other concepts.

    The returned callable has signature (zrest, rng) -> float with
    zrest holding the other five concepts in ascending index order.
    """
    rest = [k for k in range(6) if k != j]

    def draw(zrest, rng: np.random.Generator) -> float:
        zrest = np.asarray(zrest, dtype=float)
        if zrest.shape != (5,):
            raise ValueError("zrest must hold the five other concepts")
        return counting_conditional_sample(
            params, j, dict(zip(rest, zrest.tolist())), rng
        )

    return draw


def counting_oracle_predictor(z, rng: np.random.Generator) -> np.ndarray | float:
    """Perfect red-threes count predictor with fresh output dither.

    Recovers the red count by rounding and re-dithers, so the output
    has the same law and dependence structure as the red-threes concept
    while being conditionally independent of everything else given it.
    Accepts a 6-vector or an (n, 6) batch.
    """
    zv = np.asarray(z, dtype=float)
    reds = _round_count(zv[..., RED_THREES])
    out = reds + rng.uniform(-0.5, 0.5, size=reds.shape)
    return float(out) if out.ndim == 0 else out
