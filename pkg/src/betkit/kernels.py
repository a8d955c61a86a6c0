"""Kernel evaluation and data-driven bandwidth selection.

Positive-definite kernels are the similarity measure inside every payoff
in this package.  Two families are supported: the linear kernel (dot
product) and the Gaussian RBF kernel.  RBF bandwidths are either fixed
up front or recomputed from a quantile of the pairwise distances of the
observations seen so far, which keeps the scale of the kernel matched
to the scale of the stream without any tuning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "KernelSpec",
    "eval_kernel",
    "kernel_row",
    "bandwidth_from_history",
    "PairwiseDistanceQuantile",
]

_FAMILIES = ("linear", "rbf")
_RULES = ("fixed", "quantile")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus the rule used to pick an RBF bandwidth.

    Attributes:
        family: "linear" or "rbf".
        rule: "fixed" uses ``sigma`` verbatim; "quantile" recomputes the
            bandwidth as the ``q``-quantile of pairwise distances over
            whatever history the caller supplies.
        sigma: bandwidth under the "fixed" rule.
        q: pairwise-distance quantile under the "quantile" rule.
        fallback_bandwidth: used when a quantile cannot be formed (fewer
            than two points) or degenerates to zero.
    """

    family: str = "rbf"
    rule: str = "quantile"
    sigma: float = 1.0
    q: float = 0.5
    fallback_bandwidth: float = 1.0

    def __post_init__(self) -> None:
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.rule not in _RULES:
            raise ValueError(f"unknown bandwidth rule {self.rule!r}")
        if self.rule == "fixed" and not self.sigma > 0:
            raise ValueError("fixed bandwidth must be positive")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("bandwidth quantile must lie in [0, 1]")
        if not self.fallback_bandwidth > 0:
            raise ValueError("fallback bandwidth must be positive")


def _as_points(x) -> np.ndarray:
    """Coerce a scalar or vector to a 1-D float array."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"expected a scalar or 1-D vector, got shape {arr.shape}")
    return arr


def eval_kernel(spec: KernelSpec, bandwidth: float, x, y) -> float:
    """Evaluate k(x, y) for the given spec at an explicit bandwidth.

    The bandwidth is passed in rather than read off the spec so that
    callers maintaining a running history can freeze it per step.  It is
    ignored by the linear family.
    """
    xv = _as_points(x)
    yv = _as_points(y)
    if xv.shape != yv.shape:
        raise ValueError(f"dimension mismatch: {xv.shape} vs {yv.shape}")
    if spec.family == "linear":
        return float(xv @ yv)
    if not bandwidth > 0:
        raise ValueError("rbf kernel needs a positive bandwidth")
    sq = float(np.sum((xv - yv) ** 2))
    return float(np.exp(-sq / (2.0 * bandwidth**2)))


def kernel_row(spec: KernelSpec, bandwidth: float, points: np.ndarray, x) -> np.ndarray:
    """Evaluate k(p, x) for every row p of ``points`` in one shot.

    ``points`` has shape (n,) for scalar observations or (n, d) for
    vector ones; ``x`` must match.  Returns shape (n,).
    """
    pts = np.asarray(points, dtype=float)
    xv = _as_points(x)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[1] != xv.shape[0]:
        raise ValueError(f"dimension mismatch: history dim {pts.shape[1]}, point dim {xv.shape[0]}")
    if spec.family == "linear":
        return pts @ xv
    if not bandwidth > 0:
        raise ValueError("rbf kernel needs a positive bandwidth")
    sq = np.sum((pts - xv) ** 2, axis=1)
    return np.exp(-sq / (2.0 * bandwidth**2))


def _interpolated_quantile(sorted_vals: np.ndarray, q: float) -> float:
    """Linear-interpolation quantile of an already sorted 1-D array."""
    n = sorted_vals.shape[0]
    if n == 1:
        return float(sorted_vals[0])
    pos = q * (n - 1)
    lo = int(np.floor(pos))
    hi = min(lo + 1, n - 1)
    frac = pos - lo
    return float(sorted_vals[lo] * (1.0 - frac) + sorted_vals[hi] * frac)


def bandwidth_from_history(spec: KernelSpec, history) -> float:
    """Bandwidth implied by the spec for the given observation history.

    Under the "fixed" rule this is just ``spec.sigma``.  Under the
    "quantile" rule it is the ``q``-quantile (linear interpolation) of
    all pairwise Euclidean distances between history points, falling
    back to ``spec.fallback_bandwidth`` when fewer than two points are
    stored or the quantile is zero.
    """
    if spec.rule == "fixed":
        return spec.sigma
    pts = np.asarray(list(history), dtype=float)
    if pts.shape[0] < 2:
        return spec.fallback_bandwidth
    if pts.ndim == 1:
        pts = pts[:, None]
    diffs = pts[:, None, :] - pts[None, :, :]
    dmat = np.sqrt(np.sum(diffs**2, axis=-1))
    iu = np.triu_indices(pts.shape[0], k=1)
    dists = np.sort(dmat[iu])
    bw = _interpolated_quantile(dists, spec.q)
    if bw <= 0.0:
        return spec.fallback_bandwidth
    return bw


class _RowBuffer:
    """Append-only 2-D float buffer that doubles capacity as it grows.

    `view` returns the filled rows without copying, so repeated appends
    stay O(1) amortized instead of restacking the history every step.
    """

    def __init__(self) -> None:
        self._data: np.ndarray | None = None
        self._n = 0

    def __len__(self) -> int:
        return self._n

    @property
    def width(self) -> int | None:
        """Row length, or None before the first append."""
        return None if self._data is None else self._data.shape[1]

    def add(self, row: np.ndarray) -> None:
        if self._data is None:
            self._data = np.empty((8, row.shape[0]), dtype=float)
        elif row.shape[0] != self._data.shape[1]:
            raise ValueError(
                f"row has length {row.shape[0]}, buffer stores length {self._data.shape[1]}"
            )
        elif self._n == self._data.shape[0]:
            grown = np.empty((2 * self._n, self._data.shape[1]), dtype=float)
            grown[: self._n] = self._data
            self._data = grown
        self._data[self._n] = row
        self._n += 1

    def view(self) -> np.ndarray:
        if self._data is None:
            return np.empty((0, 0), dtype=float)
        return self._data[: self._n]


def _merge_sorted(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Merge two sorted 1-D arrays into a new sorted array."""
    if a.size == 0:
        return b.copy()
    if b.size == 0:
        return a.copy()
    out = np.empty(a.size + b.size, dtype=float)
    pos = np.searchsorted(a, b, side="right") + np.arange(b.size)
    mask = np.ones(out.size, dtype=bool)
    mask[pos] = False
    out[pos] = b
    out[mask] = a
    return out


def _kth_of_two_sorted(a: np.ndarray, b: np.ndarray, k: int) -> float:
    """The k-th smallest (0-based) element of the union of two sorted arrays.

    Binary search over how many elements the answer takes from ``a``,
    so each call is O(log) rather than materializing the merge.
    """
    lo = max(0, k + 1 - b.size)
    hi = min(k + 1, a.size)
    while lo < hi:
        i = (lo + hi) // 2
        if a[i] < b[k - i]:
            lo = i + 1
        else:
            hi = i
    i = lo
    j = k + 1 - i
    left_a = a[i - 1] if i > 0 else -np.inf
    left_b = b[j - 1] if j > 0 else -np.inf
    return float(max(left_a, left_b))


class PairwiseDistanceQuantile:
    """Running quantile of all pairwise distances of a growing point set.

    Appending the t-th point costs O(t) distance evaluations; the new
    distances land in a small sorted pending buffer that is folded into
    the consolidated main buffer only when it grows past a fraction of
    it, keeping total merge work near-linear in the distance count.
    Quantile lookups bisect the two sorted buffers jointly, and the
    result matches `bandwidth_from_history` recomputed from scratch.
    """

    _MERGE_MIN = 512

    def __init__(self) -> None:
        self._pts = _RowBuffer()
        self._main = np.empty(0, dtype=float)
        self._pend = np.empty(0, dtype=float)

    def __len__(self) -> int:
        return len(self._pts)

    @property
    def distance_count(self) -> int:
        return self._main.size + self._pend.size

    def add(self, point) -> None:
        p = _as_points(point)
        if len(self._pts) > 0:
            new = np.sort(np.sqrt(np.sum((self._pts.view() - p) ** 2, axis=1)))
            self._pend = _merge_sorted(self._pend, new)
            if self._pend.size >= max(self._MERGE_MIN, self._main.size // 8):
                self._main = _merge_sorted(self._main, self._pend)
                self._pend = np.empty(0, dtype=float)
        self._pts.add(p)

    def sorted_distances(self) -> np.ndarray:
        """All stored pairwise distances, sorted, as a fresh array."""
        return _merge_sorted(self._main, self._pend)

    def _order_statistic(self, k: int) -> float:
        return _kth_of_two_sorted(self._main, self._pend, k)

    def bandwidth(self, spec: KernelSpec) -> float:
        """Bandwidth for the stored points under the spec's rule."""
        if spec.rule == "fixed":
            return spec.sigma
        n = self.distance_count
        if n == 0:
            return spec.fallback_bandwidth
        if n == 1:
            bw = self._order_statistic(0)
        else:
            pos = spec.q * (n - 1)
            lo = int(np.floor(pos))
            hi = min(lo + 1, n - 1)
            frac = pos - lo
            bw = self._order_statistic(lo) * (1.0 - frac) + self._order_statistic(hi) * frac
        if bw <= 0.0:
            return spec.fallback_bandwidth
        return bw
