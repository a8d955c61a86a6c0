"""Payoff constructions checked against brute-force mean-embedding sums."""

from __future__ import annotations

import math

import numpy as np
import pytest

from betkit.kernels import KernelSpec, bandwidth_from_history, eval_kernel
from betkit.payoffs import CskitPayoff, SkitPayoff, XskitPayoff

RBF = KernelSpec(family="rbf", rule="quantile", q=0.5)
LIN = KernelSpec(family="linear", rule="fixed", sigma=1.0)


def brute_skit_rho(payoff, hist, y, z):
    """Direct double-sum witness evaluation from an explicit history list."""
    if not hist:
        return 0.0
    bwy = bandwidth_from_history(payoff.kernel_y, [d[0] for d in hist])
    bwz = bandwidth_from_history(payoff.kernel_z, [d[1] for d in hist])
    kys = [eval_kernel(payoff.kernel_y, bwy, hy, y) for hy, _ in hist]
    kzs = [eval_kernel(payoff.kernel_z, bwz, hz, z) for _, hz in hist]
    n = len(hist)
    joint = sum(a * b for a, b in zip(kys, kzs)) / n
    return joint - (sum(kys) / n) * (sum(kzs) / n)


def brute_skit_kappa(payoff, hist, d1, d2):
    y1, z1 = d1
    y2, z2 = d2
    val = (
        brute_skit_rho(payoff, hist, y1, z1)
        + brute_skit_rho(payoff, hist, y2, z2)
        - brute_skit_rho(payoff, hist, y1, z2)
        - brute_skit_rho(payoff, hist, y2, z1)
    )
    return math.tanh(val)


def brute_cskit_rho(payoff, hist, hist_tilde, y, zj, zr):
    if not hist:
        return 0.0
    bwy = bandwidth_from_history(payoff.kernel_y, [d[0] for d in hist])
    bwj = bandwidth_from_history(payoff.kernel_zj, [d[1] for d in hist])
    bwr = bandwidth_from_history(payoff.kernel_zrest, [d[2] for d in hist])
    additive = all(
        spec.family == "linear"
        for spec in (payoff.kernel_y, payoff.kernel_zj, payoff.kernel_zrest)
    )
    n = len(hist)
    tot_obs = 0.0
    tot_tld = 0.0
    for (hy, hj, hr), (_, tj, _) in zip(hist, hist_tilde):
        ky = eval_kernel(payoff.kernel_y, bwy, hy, y)
        kr = eval_kernel(payoff.kernel_zrest, bwr, hr, zr)
        kj_obs = eval_kernel(payoff.kernel_zj, bwj, hj, zj)
        kj_tld = eval_kernel(payoff.kernel_zj, bwj, tj, zj)
        if additive:
            tot_obs += ky + kj_obs + kr
            tot_tld += ky + kj_tld + kr
        else:
            tot_obs += ky * kj_obs * kr
            tot_tld += ky * kj_tld * kr
    return tot_obs / n - tot_tld / n


def brute_cskit_kappa(payoff, hist, hist_tilde, obs, zj_tilde):
    y, zj, zr = obs
    val = brute_cskit_rho(payoff, hist, hist_tilde, y, zj, zr) - brute_cskit_rho(
        payoff, hist, hist_tilde, y, zj_tilde, zr
    )
    return math.tanh(val)


def brute_xskit_rho(payoff, hist_test, hist_null, y):
    if not hist_test:
        return 0.0
    bw = bandwidth_from_history(payoff.kernel_y, hist_test + hist_null)
    kt = [eval_kernel(payoff.kernel_y, bw, h, y) for h in hist_test]
    kn = [eval_kernel(payoff.kernel_y, bw, h, y) for h in hist_null]
    return sum(kt) / len(kt) - sum(kn) / len(kn)


def brute_xskit_kappa(payoff, hist_test, hist_null, y_test, y_null):
    val = brute_xskit_rho(payoff, hist_test, hist_null, y_test) - brute_xskit_rho(
        payoff, hist_test, hist_null, y_null
    )
    return math.tanh(val)


class TestSkitPayoff:
    def test_empty_history_gives_zero(self):
        payoff = SkitPayoff(RBF, RBF)
        payoff.refresh_bandwidths()
        assert payoff.rho(0.3, -0.7) == 0.0
        assert payoff.step_kappa((1.0, 2.0), (3.0, 4.0)) == 0.0

    def test_single_linear_pair_gives_zero_witness(self):
        # with one stored point the joint term equals the product term
        payoff = SkitPayoff(LIN, LIN)
        payoff.append((2.0, 3.0))
        payoff.refresh_bandwidths()
        for y, z in [(0.0, 0.0), (1.5, -2.0), (4.0, 4.0)]:
            assert payoff.rho(y, z) == 0.0

    def test_matches_brute_force_on_random_histories(self):
        rng = np.random.default_rng(10)
        for ky, kz in [(RBF, RBF), (RBF, LIN), (LIN, RBF)]:
            payoff = SkitPayoff(ky, kz)
            hist = []
            for _ in range(5):
                d1 = (float(rng.normal()), float(rng.normal()))
                d2 = (float(rng.normal()), float(rng.normal()))
                expected = brute_skit_kappa(payoff, hist, d1, d2)
                assert payoff.step_kappa(d1, d2) == pytest.approx(expected, abs=1e-12)
                hist += [d1, d2]
            assert len(payoff) == len(hist)

    def test_equal_z_values_give_zero(self):
        payoff = SkitPayoff(RBF, RBF)
        payoff.append((0.5, 1.0))
        payoff.append((-0.3, 2.0))
        assert payoff.step_kappa((1.0, 3.0), (2.0, 3.0)) == 0.0

    def test_z_swap_negates_kappa(self):
        rng = np.random.default_rng(12)
        hist = [(float(rng.normal()), float(rng.normal())) for _ in range(6)]
        a = SkitPayoff(RBF, RBF)
        b = SkitPayoff(RBF, RBF)
        for d in hist:
            a.append(d)
            b.append(d)
        y1, z1, y2, z2 = rng.normal(size=4)
        kappa = a.step_kappa((y1, z1), (y2, z2))
        swapped = b.step_kappa((y1, z2), (y2, z1))
        assert swapped == pytest.approx(-kappa, abs=1e-12)

    def test_pair_order_does_not_matter(self):
        rng = np.random.default_rng(13)
        hist = [(float(rng.normal()), float(rng.normal())) for _ in range(4)]
        a = SkitPayoff(RBF, RBF)
        b = SkitPayoff(RBF, RBF)
        for d in hist:
            a.append(d)
            b.append(d)
        d1 = (0.4, -1.1)
        d2 = (-0.2, 0.9)
        assert a.step_kappa(d1, d2) == pytest.approx(b.step_kappa(d2, d1), abs=1e-12)

    def test_history_stays_even_through_steps(self):
        rng = np.random.default_rng(14)
        payoff = SkitPayoff(RBF, RBF)
        for t in range(5):
            payoff.step_kappa(tuple(rng.normal(size=2)), tuple(rng.normal(size=2)))
            assert len(payoff) == 2 * (t + 1)


class TestCskitPayoff:
    def test_empty_history_gives_zero(self):
        payoff = CskitPayoff(RBF, RBF, RBF)
        payoff.refresh_bandwidths()
        assert payoff.rho(0.1, 0.2, [0.3, 0.4]) == 0.0
        assert payoff.step_kappa((1.0, 2.0, [3.0, 4.0]), 5.0) == 0.0

    def test_identical_tilde_history_gives_zero_witness(self):
        rng = np.random.default_rng(15)
        payoff = CskitPayoff(RBF, RBF, RBF)
        for _ in range(4):
            y, zj = rng.normal(size=2)
            zr = rng.normal(size=2)
            payoff.append((float(y), float(zj), zr), float(zj))
        payoff.refresh_bandwidths()
        for _ in range(3):
            y, zj = rng.normal(size=2)
            assert payoff.rho(float(y), float(zj), rng.normal(size=2)) == 0.0

    def test_matches_brute_force_on_random_histories(self):
        rng = np.random.default_rng(16)
        for ky, kj, kr in [(RBF, RBF, RBF), (LIN, RBF, LIN), (LIN, LIN, LIN)]:
            payoff = CskitPayoff(ky, kj, kr)
            hist = []
            hist_tilde = []
            for _ in range(6):
                y, zj, zt = rng.normal(size=3)
                zr = rng.normal(size=2)
                obs = (float(y), float(zj), zr)
                expected = brute_cskit_kappa(payoff, hist, hist_tilde, obs, float(zt))
                assert payoff.step_kappa(obs, float(zt)) == pytest.approx(expected, abs=1e-12)
                hist.append(obs)
                hist_tilde.append((float(y), float(zt), zr))

    def test_all_linear_witness_sees_first_moments_only(self):
        # with one linear kernel on the concatenated triple, the witness
        # difference collapses to (mean zj hist - mean tilde hist) * zj,
        # so the payoff ignores y and z_rest entirely
        rng = np.random.default_rng(26)
        payoff = CskitPayoff(LIN, LIN, LIN)
        zj_hist, zt_hist = [], []
        for _ in range(7):
            y, zj, zt = rng.normal(size=3)
            payoff.append((float(y), float(zj), rng.normal(size=2)), float(zt))
            zj_hist.append(float(zj))
            zt_hist.append(float(zt))
        payoff.refresh_bandwidths()
        gap = np.mean(zj_hist) - np.mean(zt_hist)
        for _ in range(3):
            y, zj, zt = rng.normal(size=3)
            kappa = payoff.step_kappa((float(y), float(zj), rng.normal(size=2)), float(zt))
            assert kappa == pytest.approx(math.tanh(gap * (zj - zt)), abs=1e-12)
            gap = np.mean(payoff._zj.view()) - np.mean(payoff._zj_tilde.view())

    def test_tilde_equal_to_observed_gives_zero(self):
        rng = np.random.default_rng(17)
        payoff = CskitPayoff(RBF, RBF, RBF)
        for _ in range(4):
            y, zj, zt = rng.normal(size=3)
            payoff.append((float(y), float(zj), rng.normal(size=2)), float(zt))
        assert payoff.step_kappa((0.3, 0.8, rng.normal(size=2)), 0.8) == 0.0

    def test_exchanging_observed_and_tilde_negates_kappa(self):
        rng = np.random.default_rng(18)
        a = CskitPayoff(RBF, RBF, RBF)
        b = CskitPayoff(RBF, RBF, RBF)
        for _ in range(5):
            y, zj, zt = rng.normal(size=3)
            zr = rng.normal(size=2)
            a.append((float(y), float(zj), zr), float(zt))
            b.append((float(y), float(zj), zr), float(zt))
        y, zj, zt = rng.normal(size=3)
        zr = rng.normal(size=2)
        kappa = a.step_kappa((float(y), float(zj), zr), float(zt))
        swapped = b.step_kappa((float(y), float(zt), zr), float(zj))
        assert swapped == pytest.approx(-kappa, abs=1e-12)

    def test_rest_length_mismatch_raises(self):
        payoff = CskitPayoff(RBF, RBF, RBF)
        payoff.append((0.0, 0.0, [1.0, 2.0]), 0.5)
        with pytest.raises(ValueError):
            payoff.rho(0.0, 0.0, [1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            payoff.step_kappa((0.0, 0.0, [1.0]), 0.5)


class TestXskitPayoff:
    def test_empty_history_gives_zero(self):
        payoff = XskitPayoff(RBF)
        payoff.refresh_bandwidth()
        assert payoff.rho(0.4) == 0.0
        assert payoff.step_kappa(0.2, 0.9) == 0.0

    def test_equal_histories_give_zero_witness(self):
        payoff = XskitPayoff(RBF)
        for v in (0.1, 0.5, -0.4):
            payoff.append(v, v)
        payoff.refresh_bandwidth()
        for y in (0.0, 0.3, 2.0):
            assert payoff.rho(y) == 0.0

    def test_equal_arguments_give_zero(self):
        payoff = XskitPayoff(RBF)
        payoff.append(0.2, 0.9)
        payoff.append(0.4, 0.1)
        assert payoff.step_kappa(0.7, 0.7) == 0.0

    def test_matches_brute_force_on_random_histories(self):
        rng = np.random.default_rng(19)
        for spec in (RBF, LIN):
            payoff = XskitPayoff(spec)
            hist_test: list[float] = []
            hist_null: list[float] = []
            for _ in range(6):
                yt, yn = rng.normal(size=2)
                expected = brute_xskit_kappa(payoff, hist_test, hist_null, float(yt), float(yn))
                assert payoff.step_kappa(float(yt), float(yn)) == pytest.approx(
                    expected, abs=1e-12
                )
                hist_test.append(float(yt))
                hist_null.append(float(yn))

    def test_argument_swap_negates_at_fixed_histories(self):
        rng = np.random.default_rng(20)
        a = XskitPayoff(RBF)
        b = XskitPayoff(RBF)
        for _ in range(5):
            yt, yn = rng.normal(size=2)
            a.append(float(yt), float(yn))
            b.append(float(yt), float(yn))
        kappa = a.step_kappa(0.6, -0.3)
        assert b.step_kappa(-0.3, 0.6) == pytest.approx(-kappa, abs=1e-12)

    def test_history_swap_negates_at_fixed_arguments(self):
        rng = np.random.default_rng(22)
        pairs = [tuple(map(float, rng.normal(size=2))) for _ in range(5)]
        a = XskitPayoff(RBF)
        b = XskitPayoff(RBF)
        for yt, yn in pairs:
            a.append(yt, yn)
            b.append(yn, yt)
        kappa = a.step_kappa(0.6, -0.3)
        assert b.step_kappa(0.6, -0.3) == pytest.approx(-kappa, abs=1e-12)

    def test_full_stream_swap_reproduces_kappa(self):
        # exchanging the two streams wholesale, arguments included, composes
        # the two negations above and leaves every payoff unchanged
        rng = np.random.default_rng(23)
        pairs = [tuple(map(float, rng.normal(size=2))) for _ in range(6)]
        a = XskitPayoff(RBF)
        b = XskitPayoff(RBF)
        for yt, yn in pairs:
            ka = a.step_kappa(yt, yn)
            kb = b.step_kappa(yn, yt)
            assert kb == pytest.approx(ka, abs=1e-12)


def test_all_payoffs_stay_strictly_inside_unit_interval():
    rng = np.random.default_rng(24)
    skit = SkitPayoff(RBF, RBF)
    cskit = CskitPayoff(RBF, RBF, RBF)
    xskit = XskitPayoff(RBF)
    for _ in range(30):
        k1 = skit.step_kappa(tuple(rng.normal(size=2) * 5), tuple(rng.normal(size=2) * 5))
        k2 = cskit.step_kappa(
            (float(rng.normal() * 5), float(rng.normal() * 5), rng.normal(size=2)),
            float(rng.normal() * 5),
        )
        k3 = xskit.step_kappa(float(rng.normal() * 5), float(rng.normal() * 5))
        for k in (k1, k2, k3):
            assert -1.0 < k < 1.0


def test_bandwidths_are_set_before_the_step_data_is_appended():
    # the payoff at step t must not depend on the incoming observation's
    # effect on the bandwidth; a clone that never sees the new pair agrees
    rng = np.random.default_rng(25)
    a = SkitPayoff(RBF, RBF)
    b = SkitPayoff(RBF, RBF)
    for _ in range(4):
        d = tuple(rng.normal(size=2))
        a.append(d)
        b.append(d)
    b.refresh_bandwidths()
    a.step_kappa((100.0, -50.0), (3.0, 7.0))
    assert a.bandwidth_y == b.bandwidth_y
    assert a.bandwidth_z == b.bandwidth_z
