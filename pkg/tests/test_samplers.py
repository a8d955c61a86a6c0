"""Conditional samplers: analytic posterior, weighted KDE, and exact matchers."""

from __future__ import annotations

import numpy as np
import pytest

from betkit.samplers import (
    EmbeddingSampler,
    GaussianConditionalParams,
    WeightedKdeSampler,
    _neff,
    gaussian_conditional,
    sample_matching_binary,
)


class TestGaussianConditional:
    def test_hand_values_at_unit_variances(self):
        # mu1=1, sigma1=sigma3=1: posterior mean (z3 + 1)/2, variance 1/2
        params = GaussianConditionalParams()
        assert gaussian_conditional(params, 1.0) == (1.0, 0.5)
        assert gaussian_conditional(params, -1.0) == (0.0, 0.5)
        assert gaussian_conditional(params, 0.0) == (0.5, 0.5)

    def test_general_precision_weighting(self):
        params = GaussianConditionalParams(mu1=2.0, sigma1=0.5, sigma3=2.0)
        mean, var = gaussian_conditional(params, 1.0)
        assert mean == pytest.approx((0.25 * 1.0 + 4.0 * 2.0) / 4.25, abs=1e-15)
        assert var == pytest.approx(1.0 / (1.0 / 0.25 + 1.0 / 4.0), abs=1e-15)

    def test_noisy_observation_limit_recovers_prior(self):
        # a huge observation noise makes the conditional revert to the prior
        params = GaussianConditionalParams(mu1=1.0, sigma1=1.0, sigma3=1e6)
        mean, var = gaussian_conditional(params, -50.0)
        assert mean == pytest.approx(1.0, abs=1e-6)
        assert var == pytest.approx(1.0, abs=1e-6)

    def test_sharp_observation_limit_pins_the_mean(self):
        params = GaussianConditionalParams(mu1=1.0, sigma1=1e6, sigma3=1.0)
        mean, var = gaussian_conditional(params, -50.0)
        assert mean == pytest.approx(-50.0, abs=1e-4)
        assert var == pytest.approx(1.0, abs=1e-6)

    def test_monte_carlo_agreement(self):
        # conditioning standard draws of (z1, z3=z1+g) near z3=1 recovers
        # the analytic posterior moments
        rng = np.random.default_rng(2)
        z1 = rng.normal(1.0, 1.0, size=400_000)
        z3 = z1 + rng.normal(size=z1.shape[0])
        sel = np.abs(z3 - 1.0) < 0.02
        mean, var = gaussian_conditional(GaussianConditionalParams(), 1.0)
        assert z1[sel].mean() == pytest.approx(mean, abs=0.02)
        assert z1[sel].var() == pytest.approx(var, abs=0.02)


class TestNeff:
    def test_uniform_weights_count_rows(self):
        assert _neff(np.ones(50)) == pytest.approx(50.0, abs=1e-12)

    def test_single_spike_counts_one(self):
        w = np.zeros(50)
        w[3] = 0.7
        assert _neff(w) == pytest.approx(1.0, abs=1e-12)

    def test_all_zero_weights_give_zero(self):
        assert _neff(np.zeros(10)) == 0.0

    def test_monotone_in_bandwidth(self):
        rng = np.random.default_rng(5)
        col = rng.normal(size=1000)
        values = []
        for nu in np.logspace(-3, 2, 30):
            values.append(_neff(np.exp(-((col - 0.5) ** 2) / (2 * nu * nu))))
        assert all(a <= b + 1e-9 for a, b in zip(values, values[1:]))

    def test_scale_invariant_down_to_subnormal_weights(self):
        # squares of weights near 1e-200 underflow to zero even though
        # the ratio itself is well defined
        w = np.array([1.0, 1.0, 1.0, 1.0, 1.0]) * 1e-200
        assert _neff(w) == pytest.approx(5.0, abs=1e-12)
        spiky = np.array([1e-200, 1e-230, 0.0])
        assert _neff(spiky) == pytest.approx(1.0, abs=1e-12)


class TestWeightedKdeSampler:
    def test_constructor_validation(self):
        rng = np.random.default_rng(0)
        data = rng.normal(size=(100, 2))
        with pytest.raises(ValueError):
            WeightedKdeSampler(data, target_neff=1.0)
        with pytest.raises(ValueError):
            WeightedKdeSampler(data, target_neff=101.0)
        with pytest.raises(ValueError):
            WeightedKdeSampler(data[:1])
        with pytest.raises(ValueError):
            WeightedKdeSampler(data[:, 0])

    def test_bisection_hits_target_within_one_percent(self):
        rng = np.random.default_rng(0)
        data = rng.normal(size=(2000, 2))
        sampler = WeightedKdeSampler(data, target_neff=200.0)
        nu = sampler.fit_bandwidth_for_neff([0], np.array([0.5]))
        neff = _neff(sampler._weights(np.array([0]), np.array([0.5]), nu))
        assert abs(neff - 200.0) <= 0.01 * 200.0

    def test_bisection_survives_far_conditioning_points(self):
        # a distant query makes every weight subnormal at mid-sized
        # kernel widths; the fit must step past that regime
        data = np.array([[0.0, 0.0], [0.5, 1.0], [1.0, -1.0], [0.2, 0.5]])
        sampler = WeightedKdeSampler(data, target_neff=2.0)
        nu = sampler.fit_bandwidth_for_neff([0], np.array([30.0]))
        assert np.isfinite(nu) and nu > 0
        value = sampler.sample_zj_given_rest(1, np.array([30.0]), np.random.default_rng(0))
        assert np.isfinite(value)

    def test_bisection_various_targets(self):
        rng = np.random.default_rng(1)
        data = rng.normal(size=(1500, 3))
        sampler = WeightedKdeSampler(data)
        for target in (10.0, 100.0, 700.0):
            nu = sampler.fit_bandwidth_for_neff([1, 2], np.array([0.0, -0.3]), target=target)
            neff = _neff(sampler._weights(np.array([1, 2]), np.array([0.0, -0.3]), nu))
            assert abs(neff - target) <= 0.01 * target

    def test_conditioning_concentrates_on_the_right_cluster(self):
        rng = np.random.default_rng(3)
        z = np.vstack([np.zeros((300, 2)), np.full((300, 2), 10.0)])
        z = z + rng.normal(scale=0.1, size=z.shape)
        sampler = WeightedKdeSampler(z, target_neff=50.0)
        draws = np.array(
            [sampler.sample_full_z_given_subset([0], np.array([0.0]), rng) for _ in range(50)]
        )
        # conditioning near the first cluster keeps the free coordinate there
        assert np.all(np.abs(draws[:, 1]) < 2.0)
        draws_far = np.array(
            [sampler.sample_full_z_given_subset([0], np.array([10.0]), rng) for _ in range(50)]
        )
        assert np.all(np.abs(draws_far[:, 1] - 10.0) < 2.0)

    def test_conditioned_coordinates_are_exact(self):
        rng = np.random.default_rng(4)
        z = rng.normal(size=(500, 4))
        sampler = WeightedKdeSampler(z)
        zC = np.array([0.25, -1.5])
        draw = sampler.sample_full_z_given_subset([1, 3], zC, rng)
        assert draw[1] == 0.25
        assert draw[3] == -1.5

    def test_degenerate_column_is_reproduced_exactly(self):
        # zero weighted variance means zero smoothing noise
        rng = np.random.default_rng(5)
        z = np.column_stack([rng.normal(size=500), np.full(500, 3.25)])
        sampler = WeightedKdeSampler(z)
        draw = sampler.sample_full_z_given_subset([0], np.array([0.2]), rng)
        assert draw[1] == 3.25

    def test_full_conditioning_returns_the_condition(self):
        rng = np.random.default_rng(6)
        z = rng.normal(size=(100, 3))
        sampler = WeightedKdeSampler(z)
        zC = np.array([9.0, -9.0, 0.5])
        np.testing.assert_array_equal(
            sampler.sample_full_z_given_subset([0, 1, 2], zC, rng), zC
        )

    def test_empty_conditioning_draws_from_the_marginal(self):
        rng = np.random.default_rng(7)
        z = rng.normal(loc=5.0, size=(2000, 2))
        sampler = WeightedKdeSampler(z)
        draws = np.array(
            [sampler.sample_full_z_given_subset([], np.array([]), rng) for _ in range(200)]
        )
        assert draws[:, 0].mean() == pytest.approx(5.0, abs=0.5)

    def test_condition_outside_support_raises(self):
        rng = np.random.default_rng(8)
        z = rng.normal(size=(200, 2))
        sampler = WeightedKdeSampler(z)
        with pytest.raises(ValueError, match="outside the data support"):
            sampler.sample_full_z_given_subset([0], np.array([1e9]), rng)

    def test_duplicate_conditioning_indices_raise(self):
        rng = np.random.default_rng(9)
        sampler = WeightedKdeSampler(rng.normal(size=(50, 3)))
        with pytest.raises(ValueError):
            sampler.sample_full_z_given_subset([0, 0], np.array([1.0, 1.0]), rng)

    def test_sample_zj_given_rest_validation_and_determinism(self):
        rng = np.random.default_rng(10)
        z = rng.normal(size=(300, 3))
        sampler = WeightedKdeSampler(z)
        with pytest.raises(ValueError):
            sampler.sample_zj_given_rest(5, np.zeros(2), rng)
        with pytest.raises(ValueError):
            sampler.sample_zj_given_rest(0, np.zeros(3), rng)
        a = sampler.sample_zj_given_rest(1, np.array([0.1, -0.2]), np.random.default_rng(42))
        b = sampler.sample_zj_given_rest(1, np.array([0.1, -0.2]), np.random.default_rng(42))
        assert a == b

    def test_conditional_draw_tracks_dependence(self):
        # z1 = z0 + small noise, so conditioning on z0 must move z1
        rng = np.random.default_rng(11)
        z0 = rng.normal(size=3000)
        z = np.column_stack([z0, z0 + rng.normal(scale=0.1, size=3000)])
        sampler = WeightedKdeSampler(z, target_neff=100.0)
        lo = [sampler.sample_zj_given_rest(1, np.array([-2.0]), rng) for _ in range(40)]
        hi = [sampler.sample_zj_given_rest(1, np.array([2.0]), rng) for _ in range(40)]
        assert np.mean(lo) < -1.0
        assert np.mean(hi) > 1.0


class TestEmbeddingSampler:
    def test_row_count_mismatch_raises(self):
        rng = np.random.default_rng(12)
        with pytest.raises(ValueError):
            EmbeddingSampler(rng.normal(size=(5, 4)), rng.normal(size=(6, 3)))

    def test_full_conditioning_on_a_stored_row_returns_its_embedding(self):
        rng = np.random.default_rng(13)
        h = rng.normal(size=(50, 4))
        z = rng.normal(size=(50, 3))
        sampler = EmbeddingSampler(h, z)
        out = sampler.sample_embedding_given_zC([0, 1, 2], z[17], rng)
        np.testing.assert_array_equal(out, h[17])

    def test_single_row_dataset_always_returns_it(self):
        rng = np.random.default_rng(14)
        h = rng.normal(size=(1, 4))
        z = rng.normal(size=(1, 2))
        sampler = EmbeddingSampler(h, z)
        np.testing.assert_array_equal(
            sampler.sample_embedding_given_zC([0], np.array([99.0]), rng), h[0]
        )

    def test_samples_are_dataset_rows(self):
        rng = np.random.default_rng(15)
        h = rng.normal(size=(80, 5))
        z = rng.normal(size=(80, 3))
        sampler = EmbeddingSampler(h, z)
        for _ in range(10):
            out = sampler.sample_embedding_given_zC([0], np.array([0.0]), rng)
            assert any(np.array_equal(out, row) for row in h)


class TestMatchingBinary:
    def test_draws_come_from_the_matching_set(self):
        rng = np.random.default_rng(16)
        h = rng.normal(size=(400, 3))
        z = (rng.random((400, 2)) < 0.5).astype(float)
        match = {i for i in range(400) if z[i, 0] == 1.0}
        for _ in range(20):
            out = sample_matching_binary(h, z, [0], np.array([1.0]), rng)
            assert any(np.array_equal(out, h[i]) for i in match)

    def test_uniformity_over_matches(self):
        rng = np.random.default_rng(17)
        h = np.arange(6, dtype=float)[:, None]
        z = np.array([[1.0], [1.0], [1.0], [0.0], [0.0], [0.0]])
        draws = [
            float(sample_matching_binary(h, z, [0], np.array([1.0]), rng)[0])
            for _ in range(3000)
        ]
        freq = np.bincount(np.array(draws, dtype=int), minlength=6) / 3000.0
        # three matching rows, each near 1/3 (binomial SE ~ 0.0086)
        np.testing.assert_allclose(freq[:3], 1.0 / 3.0, atol=3 * 0.0086)
        assert freq[3:].sum() == 0.0

    def test_validation(self):
        rng = np.random.default_rng(18)
        h = np.zeros((4, 2))
        z = np.array([[0.0, 1.0]] * 4)
        with pytest.raises(ValueError, match="binary"):
            sample_matching_binary(h, z + 0.5, [0], np.array([0.0]), rng)
        with pytest.raises(ValueError, match="binary"):
            sample_matching_binary(h, z, [0], np.array([0.5]), rng)
        with pytest.raises(ValueError, match="match"):
            sample_matching_binary(h, z, [0], np.array([0.0, 1.0]), rng)
        with pytest.raises(ValueError, match="no dataset row"):
            sample_matching_binary(h, z, [0], np.array([1.0]), rng)

    def test_conditional_frequency_matches_empirical_law(self):
        # P(z1=1 | z0=1) estimated from draws agrees with the dataset fraction
        rng = np.random.default_rng(19)
        n = 500
        z0 = (rng.random(n) < 0.5).astype(float)
        z1 = np.where(rng.random(n) < 0.8, z0, 1.0 - z0)
        z = np.column_stack([z0, z1])
        h = z1[:, None]
        truth = z1[z0 == 1.0].mean()
        draws = np.array(
            [
                float(sample_matching_binary(h, z, [0], np.array([1.0]), rng)[0])
                for _ in range(2000)
            ]
        )
        se = np.sqrt(truth * (1 - truth) / 2000)
        assert draws.mean() == pytest.approx(truth, abs=3 * se + 1e-9)
