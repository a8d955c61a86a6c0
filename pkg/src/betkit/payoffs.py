"""Streaming payoff functions for the three sequential independence tests.

Each payoff turns incoming observations into a value kappa in (-1, 1)
whose conditional expectation given the past is zero under the relevant
null hypothesis, making it a fair bet for a wealth process.  The payoffs
are tanh-squashed differences of plug-in kernel mean embeddings:

* `SkitPayoff` detects marginal dependence between a prediction and a
  concept value from paired two-sample swaps.
* `CskitPayoff` detects conditional dependence by comparing each
  observation against a resample drawn from the conditional law of the
  concept given the remaining concepts.
* `XskitPayoff` compares two streams of sampled predictions (test vs
  null conditioning sets) through their kernel mean embeddings.

All embeddings are simple means over every stored point, and RBF
bandwidths are refreshed from the full pre-step history, so the payoff
at step t depends only on data strictly before t plus the step's own
observations.
"""

from __future__ import annotations

import numpy as np

from .kernels import KernelSpec, PairwiseDistanceQuantile, _RowBuffer, kernel_row

__all__ = ["SkitPayoff", "CskitPayoff", "XskitPayoff"]


def _tanh(x: float) -> float:
    return float(np.tanh(x))


class SkitPayoff:
    """Payoff for the marginal independence test on pairs (y, z).

    Consumes observations two at a time.  The swapped pair (y1, z2),
    (y2, z1) has the same distribution as the originals exactly when y
    and z are independent, so the difference of witness values is a fair
    payoff under the null.
    """

    def __init__(self, kernel_y: KernelSpec, kernel_z: KernelSpec) -> None:
        self.kernel_y = kernel_y
        self.kernel_z = kernel_z
        self._y = _RowBuffer()
        self._z = _RowBuffer()
        self._dist_y = PairwiseDistanceQuantile()
        self._dist_z = PairwiseDistanceQuantile()
        self.bandwidth_y = kernel_y.fallback_bandwidth
        self.bandwidth_z = kernel_z.fallback_bandwidth

    def __len__(self) -> int:
        return len(self._y)

    def refresh_bandwidths(self) -> None:
        """Recompute both bandwidths from the stored history."""
        self.bandwidth_y = self._dist_y.bandwidth(self.kernel_y)
        self.bandwidth_z = self._dist_z.bandwidth(self.kernel_z)

    def rho(self, y, z) -> float:
        """Witness value: joint kernel mean minus product of marginals."""
        if len(self._y) == 0:
            return 0.0
        ky = kernel_row(self.kernel_y, self.bandwidth_y, self._y.view(), y)
        kz = kernel_row(self.kernel_z, self.bandwidth_z, self._z.view(), z)
        return float(np.mean(ky * kz) - np.mean(ky) * np.mean(kz))

    def append(self, d) -> None:
        """Store one observation pair without evaluating anything."""
        y, z = d
        yv = np.atleast_1d(np.asarray(y, dtype=float))
        zv = np.atleast_1d(np.asarray(z, dtype=float))
        self._y.add(yv)
        self._z.add(zv)
        self._dist_y.add(yv)
        self._dist_z.add(zv)

    def step_kappa(self, d1, d2) -> float:
        """Process one pair of observations and return the payoff.

        Bandwidths are refreshed from the history before the pair is
        appended, so the payoff is predictable given the past.
        """
        self.refresh_bandwidths()
        y1, z1 = d1
        y2, z2 = d2
        if len(self._y) == 0:
            val = 0.0
        else:
            ys = self._y.view()
            zs = self._z.view()
            ky1 = kernel_row(self.kernel_y, self.bandwidth_y, ys, y1)
            ky2 = kernel_row(self.kernel_y, self.bandwidth_y, ys, y2)
            kz1 = kernel_row(self.kernel_z, self.bandwidth_z, zs, z1)
            kz2 = kernel_row(self.kernel_z, self.bandwidth_z, zs, z2)
            my1, my2 = np.mean(ky1), np.mean(ky2)
            mz1, mz2 = np.mean(kz1), np.mean(kz2)
            r11 = np.mean(ky1 * kz1) - my1 * mz1
            r22 = np.mean(ky2 * kz2) - my2 * mz2
            r12 = np.mean(ky1 * kz2) - my1 * mz2
            r21 = np.mean(ky2 * kz1) - my2 * mz1
            val = float(r11 + r22 - r12 - r21)
        self.append(d1)
        self.append(d2)
        return _tanh(val)


class CskitPayoff:
    """Payoff for the conditional independence test on (y, z_j, z_rest).

    Each step stores the real observation alongside a counterfactual
    where z_j is replaced by a draw from P(Z_j | Z_rest).  The witness
    contrasts kernel means over the two histories; under conditional
    independence the two are exchangeable and the payoff is fair.

    The kernel on the triple combines the per-coordinate blocks.  An
    all-linear spec is read as one linear kernel on the concatenated
    triple, so the blocks add and the witness sees first moments only;
    with any rbf block the blocks multiply (a product of rbf blocks is
    itself an rbf kernel on the concatenation).
    """

    def __init__(
        self,
        kernel_y: KernelSpec,
        kernel_zj: KernelSpec,
        kernel_zrest: KernelSpec,
    ) -> None:
        self.kernel_y = kernel_y
        self.kernel_zj = kernel_zj
        self.kernel_zrest = kernel_zrest
        self._additive = all(
            spec.family == "linear" for spec in (kernel_y, kernel_zj, kernel_zrest)
        )
        self._y = _RowBuffer()
        self._zj = _RowBuffer()
        self._zj_tilde = _RowBuffer()
        self._zrest = _RowBuffer()
        self._dist_y = PairwiseDistanceQuantile()
        self._dist_zj = PairwiseDistanceQuantile()
        self._dist_zrest = PairwiseDistanceQuantile()
        self.bandwidth_y = kernel_y.fallback_bandwidth
        self.bandwidth_zj = kernel_zj.fallback_bandwidth
        self.bandwidth_zrest = kernel_zrest.fallback_bandwidth

    def __len__(self) -> int:
        return len(self._y)

    def refresh_bandwidths(self) -> None:
        """Recompute all three bandwidths from the observed history.

        The z_j bandwidth uses the observed values only; the resampled
        counterfactuals are derived data, not observations.
        """
        self.bandwidth_y = self._dist_y.bandwidth(self.kernel_y)
        self.bandwidth_zj = self._dist_zj.bandwidth(self.kernel_zj)
        self.bandwidth_zrest = self._dist_zrest.bandwidth(self.kernel_zrest)

    def _check_rest(self, zrest) -> np.ndarray:
        rv = np.atleast_1d(np.asarray(zrest, dtype=float))
        width = self._zrest.width
        if width is not None and rv.shape[0] != width:
            raise ValueError(
                f"conditioning vector has length {rv.shape[0]}, history stores length {width}"
            )
        return rv

    def rho(self, y, zj, zrest) -> float:
        """Witness value at (y, z_j, z_rest): observed minus resampled mean."""
        if len(self._y) == 0:
            return 0.0
        rv = self._check_rest(zrest)
        ky = kernel_row(self.kernel_y, self.bandwidth_y, self._y.view(), y)
        kr = kernel_row(self.kernel_zrest, self.bandwidth_zrest, self._zrest.view(), rv)
        kj_obs = kernel_row(self.kernel_zj, self.bandwidth_zj, self._zj.view(), zj)
        kj_tld = kernel_row(self.kernel_zj, self.bandwidth_zj, self._zj_tilde.view(), zj)
        if self._additive:
            return float(np.mean(ky + kj_obs + kr) - np.mean(ky + kj_tld + kr))
        return float(np.mean(ky * kj_obs * kr) - np.mean(ky * kj_tld * kr))

    def append(self, obs, zj_tilde) -> None:
        """Store one observation and its counterfactual z_j draw."""
        y, zj, zrest = obs
        rv = self._check_rest(zrest)
        yv = np.atleast_1d(np.asarray(y, dtype=float))
        jv = np.atleast_1d(np.asarray(zj, dtype=float))
        tv = np.atleast_1d(np.asarray(zj_tilde, dtype=float))
        self._y.add(yv)
        self._zj.add(jv)
        self._zj_tilde.add(tv)
        self._zrest.add(rv)
        self._dist_y.add(yv)
        self._dist_zj.add(jv)
        self._dist_zrest.add(rv)

    def step_kappa(self, obs, zj_tilde) -> float:
        """Process one observation plus counterfactual, return the payoff."""
        self.refresh_bandwidths()
        y, zj, zrest = obs
        if len(self._y) == 0:
            val = 0.0
        else:
            rv = self._check_rest(zrest)
            ky = kernel_row(self.kernel_y, self.bandwidth_y, self._y.view(), y)
            kr = kernel_row(self.kernel_zrest, self.bandwidth_zrest, self._zrest.view(), rv)
            zj_hist = self._zj.view()
            zt_hist = self._zj_tilde.view()
            k_obs_at_obs = kernel_row(self.kernel_zj, self.bandwidth_zj, zj_hist, zj)
            k_tld_at_obs = kernel_row(self.kernel_zj, self.bandwidth_zj, zt_hist, zj)
            k_obs_at_tld = kernel_row(self.kernel_zj, self.bandwidth_zj, zj_hist, zj_tilde)
            k_tld_at_tld = kernel_row(self.kernel_zj, self.bandwidth_zj, zt_hist, zj_tilde)
            if self._additive:
                rho_obs = np.mean(ky + k_obs_at_obs + kr) - np.mean(ky + k_tld_at_obs + kr)
                rho_tld = np.mean(ky + k_obs_at_tld + kr) - np.mean(ky + k_tld_at_tld + kr)
            else:
                w = ky * kr
                rho_obs = np.mean(w * k_obs_at_obs) - np.mean(w * k_tld_at_obs)
                rho_tld = np.mean(w * k_obs_at_tld) - np.mean(w * k_tld_at_tld)
            val = float(rho_obs - rho_tld)
        self.append(obs, zj_tilde)
        return _tanh(val)


class XskitPayoff:
    """Payoff comparing two streams of sampled predictions.

    The test stream conditions on the concept under scrutiny, the null
    stream does not; equal distributions make the mean-embedding
    difference a fair payoff.  The kernel bandwidth is refreshed from
    the pooled history of both streams.
    """

    def __init__(self, kernel_y: KernelSpec) -> None:
        self.kernel_y = kernel_y
        self._test = _RowBuffer()
        self._null = _RowBuffer()
        self._dist = PairwiseDistanceQuantile()
        self.bandwidth = kernel_y.fallback_bandwidth

    def __len__(self) -> int:
        return len(self._test)

    def refresh_bandwidth(self) -> None:
        self.bandwidth = self._dist.bandwidth(self.kernel_y)

    def rho(self, y) -> float:
        """Mean similarity to the test history minus the null history."""
        if len(self._test) == 0:
            return 0.0
        kt = kernel_row(self.kernel_y, self.bandwidth, self._test.view(), y)
        kn = kernel_row(self.kernel_y, self.bandwidth, self._null.view(), y)
        return float(np.mean(kt) - np.mean(kn))

    def append(self, y_test, y_null) -> None:
        tv = np.atleast_1d(np.asarray(y_test, dtype=float))
        nv = np.atleast_1d(np.asarray(y_null, dtype=float))
        self._test.add(tv)
        self._null.add(nv)
        self._dist.add(tv)
        self._dist.add(nv)

    def step_kappa(self, y_test, y_null) -> float:
        """Process one draw from each stream and return the payoff."""
        self.refresh_bandwidth()
        val = self.rho(y_test) - self.rho(y_null)
        self.append(y_test, y_null)
        return _tanh(val)
