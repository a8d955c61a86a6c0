"""Conditional samplers backing the conditional and local tests.

Four ways to draw from a conditional law, in increasing generality:

* `gaussian_conditional` gives the closed-form posterior of the first
  latent given the third in the synthetic Gaussian generator.
* `WeightedKdeSampler` draws approximately from P(Z_j | Z_rest) or
  P(Z | Z_C) for tabular semantics by reweighting dataset rows with a
  Gaussian kernel whose width is tuned so the effective sample size
  hits a target, then adding Scott-rule smoothing noise.
* `EmbeddingSampler` lifts a KDE draw in semantics space back to a real
  embedding via nearest neighbor, so sampled embeddings always come
  from actual dataset rows.
* `sample_matching_binary` draws uniformly among rows that match a
  binary conditioning pattern exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GaussianConditionalParams",
    "gaussian_conditional",
    "WeightedKdeSampler",
    "EmbeddingSampler",
    "sample_matching_binary",
]

_LOG_NU_LO = np.log(1e-6)
_LOG_NU_HI = np.log(1e6)
_MAX_BISECT = 200
_NEFF_RTOL = 0.01


@dataclass(frozen=True)
class GaussianConditionalParams:
    """Parameters of the analytic conditional of Z1 given Z3 = z3.

    The generator draws Z1 ~ N(mu1, sigma1^2) and Z3 | Z1 ~ N(Z1,
    sigma3^2), so the posterior of Z1 given Z3 is Gaussian with a
    precision-weighted mean.
    """

    mu1: float = 1.0
    sigma1: float = 1.0
    sigma3: float = 1.0

    def __post_init__(self) -> None:
        if not (self.sigma1 > 0 and self.sigma3 > 0):
            raise ValueError("standard deviations must be positive")


def gaussian_conditional(params: GaussianConditionalParams, z3: float) -> tuple[float, float]:
    """Mean and variance of Z1 | Z3 = z3."""
    v1 = params.sigma1**2
    v3 = params.sigma3**2
    mean = (v1 / (v1 + v3)) * z3 + (v3 / (v1 + v3)) * params.mu1
    variance = 1.0 / (1.0 / v1 + 1.0 / v3)
    return float(mean), float(variance)


def _neff(weights: np.ndarray) -> float:
    """Effective sample size (sum w)^2 / sum w^2; zero if all weights vanish.

    The ratio is scale invariant, so weights are normalized by their
    maximum first; squaring raw weights near 1e-200 would underflow to
    a zero denominator even though the ratio is well defined.
    """
    top = float(np.max(weights)) if weights.size else 0.0
    if top <= 0.0:
        return 0.0
    u = weights / top
    return float(np.sum(u)) ** 2 / float(np.sum(u * u))


class WeightedKdeSampler:
    """Conditional draws from tabular data by kernel reweighting.

    Rows are weighted by a Gaussian kernel on the distance between
    their conditioning coordinates and the query condition.  The kernel
    width nu is fitted by bisection so the effective sample size
    (sum w)^2 / sum w^2 lands within 1% of ``target_neff`` (capped at
    n).  A draw picks a row proportionally to the weights and perturbs
    the sampled coordinate by Scott-rule Gaussian noise, which vanishes
    for degenerate columns.
    """

    def __init__(self, data_z: np.ndarray, target_neff: float | None = None) -> None:
        z = np.asarray(data_z, dtype=float)
        if z.ndim != 2 or z.shape[0] < 2:
            raise ValueError("need a 2-D dataset with at least two rows")
        if not np.all(np.isfinite(z)):
            raise ValueError("dataset contains non-finite values")
        self.data_z = z
        n = z.shape[0]
        if target_neff is None:
            target_neff = min(2000.0, float(n))
        if not 1.0 < target_neff <= n:
            raise ValueError(f"target_neff must lie in (1, {n}], got {target_neff}")
        self.target_neff = float(target_neff)
        self._memo: tuple[bytes, bytes, float, float] | None = None

    @property
    def n(self) -> int:
        return self.data_z.shape[0]

    @property
    def m(self) -> int:
        return self.data_z.shape[1]

    def _weights(self, cols: np.ndarray, condition: np.ndarray, nu: float) -> np.ndarray:
        diff = self.data_z[:, cols] - condition
        sq = np.sum(diff * diff, axis=1)
        return np.exp(-sq / (2.0 * nu * nu))

    def fit_bandwidth_for_neff(self, cols, condition, target: float | None = None) -> float:
        """Bisection on log nu until n_eff is within 1% of the target.

        The reachable target is min(target, n); if even the smallest
        width already exceeds it (many rows tie at the condition), the
        lower bracket is returned as the closest achievable width.
        """
        cols = np.asarray(cols, dtype=int)
        condition = np.asarray(condition, dtype=float)
        if condition.shape != (cols.shape[0],):
            raise ValueError("condition length must match the conditioning columns")
        if target is None:
            target = self.target_neff
        if target <= 1.0:
            raise ValueError("target effective sample size must exceed 1")
        target = min(float(target), float(self.n))
        key = (cols.tobytes(), condition.tobytes(), target)
        if self._memo is not None and self._memo[:3] == key:
            return self._memo[3]

        lo, hi = _LOG_NU_LO, _LOG_NU_HI
        nu = np.exp(hi)
        for _ in range(_MAX_BISECT):
            mid = 0.5 * (lo + hi)
            nu = np.exp(mid)
            neff = _neff(self._weights(cols, condition, nu))
            if abs(neff - target) <= _NEFF_RTOL * target:
                break
            if neff < target:
                lo = mid
            else:
                hi = mid
        self._memo = (*key, float(nu))
        return float(nu)

    def _conditional_weights(self, cols, condition) -> np.ndarray:
        nu = self.fit_bandwidth_for_neff(cols, condition)
        w = self._weights(np.asarray(cols, dtype=int), np.asarray(condition, dtype=float), nu)
        if not np.sum(w) > 0.0:
            raise ValueError("conditioning point lies outside the data support")
        return w

    def _scott_sigma(self, w: np.ndarray, col: int) -> float:
        """Scott-rule noise scale for one column under the given weights."""
        total = np.sum(w)
        mean = float(np.sum(w * self.data_z[:, col]) / total)
        var = float(np.sum(w * (self.data_z[:, col] - mean) ** 2) / total)
        return float(np.sqrt(max(var, 0.0)) * _neff(w) ** (-0.2))

    def sample_zj_given_rest(self, j: int, zrest, rng: np.random.Generator) -> float:
        """One draw approximating P(Z_j | Z_rest = zrest)."""
        if not 0 <= j < self.m:
            raise ValueError(f"column index {j} out of range")
        zrest = np.asarray(zrest, dtype=float)
        if zrest.shape != (self.m - 1,):
            raise ValueError(f"zrest must have length {self.m - 1}")
        cols = np.array([c for c in range(self.m) if c != j], dtype=int)
        w = self._conditional_weights(cols, zrest)
        idx = rng.choice(self.n, p=w / np.sum(w))
        noise = self._scott_sigma(w, j) * rng.standard_normal()
        return float(self.data_z[idx, j] + noise)

    def sample_full_z_given_subset(self, C, zC, rng: np.random.Generator) -> np.ndarray:
        """One draw approximating P(Z | Z_C = zC), exact on C.

        The returned vector equals zC on the conditioning coordinates
        and a smoothed bootstrap draw on the rest.  C may be empty
        (unconditional draw) or everything (nothing left to sample).
        """
        C = np.asarray(C, dtype=int)
        zC = np.asarray(zC, dtype=float)
        if zC.shape != (C.shape[0],):
            raise ValueError("zC length must match C")
        if C.shape[0] != np.unique(C).shape[0]:
            raise ValueError("conditioning set contains duplicate indices")
        out = np.empty(self.m, dtype=float)
        out[C] = zC
        comp = np.setdiff1d(np.arange(self.m), C)
        if comp.shape[0] == 0:
            return out
        if C.shape[0] == 0:
            w = np.ones(self.n)
        else:
            w = self._conditional_weights(C, zC)
        idx = rng.choice(self.n, p=w / np.sum(w))
        sigmas = np.array([self._scott_sigma(w, c) for c in comp])
        out[comp] = self.data_z[idx, comp] + sigmas * rng.standard_normal(comp.shape[0])
        return out


class EmbeddingSampler:
    """Conditional embedding draws by KDE in semantics space plus NN lift.

    A draw samples a full semantics vector given the conditioned
    coordinates, then returns the embedding row whose semantics are
    nearest to it, so every sample is a real dataset embedding.
    """

    def __init__(
        self,
        data_h: np.ndarray,
        data_z: np.ndarray,
        target_neff: float | None = None,
    ) -> None:
        h = np.asarray(data_h, dtype=float)
        z = np.asarray(data_z, dtype=float)
        if h.ndim != 2 or z.ndim != 2 or h.shape[0] != z.shape[0]:
            raise ValueError("embeddings and semantics must share their row count")
        self.data_h = h
        self.data_z = z
        # A single-row dataset admits only one answer; no KDE needed.
        self.kde = WeightedKdeSampler(z, target_neff) if z.shape[0] >= 2 else None

    def sample_embedding_given_zC(self, C, zC, rng: np.random.Generator) -> np.ndarray:
        if self.kde is None:
            return self.data_h[0]
        z_tilde = self.kde.sample_full_z_given_subset(C, zC, rng)
        sq = np.sum((self.data_z - z_tilde) ** 2, axis=1)
        return self.data_h[int(np.argmin(sq))]


def sample_matching_binary(data_h, data_z, C, zC, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw among rows whose binary semantics match zC on C."""
    h = np.asarray(data_h, dtype=float)
    z = np.asarray(data_z)
    C = np.asarray(C, dtype=int)
    zC = np.asarray(zC)
    if not np.isin(z, (0, 1)).all():
        raise ValueError("semantics matrix must be binary")
    if not np.isin(zC, (0, 1)).all():
        raise ValueError("conditioning values must be binary")
    if zC.shape != (C.shape[0],):
        raise ValueError("zC length must match C")
    mask = np.all(z[:, C] == zC, axis=1) if C.shape[0] else np.ones(z.shape[0], dtype=bool)
    rows = np.flatnonzero(mask)
    if rows.shape[0] == 0:
        raise ValueError("no dataset row matches the conditioning pattern")
    return h[rows[rng.integers(rows.shape[0])]]
