import numpy as np
import pytest

import mbhd
from mbhd.errors import (
    EpsOutOfRange,
    InsufficientSamples,
    NotFullSupport,
    OffSupportSample,
    ZeroMarginal,
)
from conftest import random_full_pmf, random_model


def fgm_setup(rho=0.3, cap=None):
    pmf = mbhd.from_table([rho, 0.5 - rho, 0.5 - rho, rho])
    model = mbhd.BoolExprModel("x1*x2")
    gs = mbhd.gram_matrix(pmf, mbhd.enumerate_subsets(2, cap))
    return pmf, model, gs


def degenerate_gs_with_pair():
    # order (empty, {1}, {1,2}) stays linearly independent on the support of
    # a table missing the (1,1) cell, while the pair pattern (1,1) has zero
    # marginal probability
    from mbhd.basis import basis_matrix, gram_system_from_gamma
    from mbhd.subsets import SubsetOrder

    pmf = mbhd.from_table([0.2, 0.4, 0.4, 0.0])
    order = SubsetOrder(d=2, cap=None, masks=(0, 0b01, 0b11))
    support = pmf.support_masks()
    e = basis_matrix(pmf, order, support)
    gamma = e.T @ (pmf.probs[support][:, None] * e)
    return gram_system_from_gamma(order, gamma, pmf)


class TestEstimate:
    def test_requires_two_samples(self):
        pmf, model, gs = fgm_setup()
        samples = mbhd.sample(pmf, 1, seed=0)
        with pytest.raises(InsufficientSamples):
            mbhd.estimate(samples, model, gs)

    def test_converges_to_exact(self):
        pmf, model, gs = fgm_setup()
        exact = mbhd.decompose(pmf, model)
        samples = mbhd.sample(pmf, 200_000, seed=3)
        result = mbhd.estimate(samples, model, gs)
        np.testing.assert_allclose(result.beta_hat, exact.beta, atol=5e-3)

    def test_plugin_consistency_within_five_standard_errors(self):
        # componentwise error bounded by five sandwich standard errors
        pmf, model, gs = fgm_setup()
        exact = mbhd.decompose(pmf, model)
        n = 100_000
        result = mbhd.estimate(mbhd.sample(pmf, n, seed=17), model, gs)
        inv = gs.inverse()
        standard_errors = np.sqrt(np.diag(inv @ result.sigma_hat @ inv) / n)
        np.testing.assert_array_less(
            np.abs(result.beta_hat - exact.beta), 5.0 * standard_errors
        )

    def test_capped_equals_uncapped_when_cap_is_d(self):
        pmf, model, _ = fgm_setup()
        gs_full = mbhd.gram_matrix(pmf, mbhd.enumerate_subsets(2))
        gs_capped = mbhd.gram_matrix(pmf, mbhd.enumerate_subsets(2, cap=2))
        samples = mbhd.sample(pmf, 500, seed=5)
        full = mbhd.estimate(samples, model, gs_full)
        capped = mbhd.estimate(samples, model, gs_capped, c=2)
        np.testing.assert_array_equal(full.beta_hat, capped.beta_hat)

    def test_no_interaction_model_unbiased_at_cap_one(self, rng):
        # additive model, independent inputs: the capped system is exact
        pmf = mbhd.product_of_marginals([0.3, 0.6])
        model = mbhd.BoolExprModel("2*x1 - 3*x2")
        exact = mbhd.decompose(pmf, model)
        assert abs(exact.beta_of(0b11)) < 1e-12
        gs1 = mbhd.gram_matrix(pmf, mbhd.enumerate_subsets(2, cap=1))
        samples = mbhd.sample(pmf, 100_000, seed=11)
        result = mbhd.estimate(samples, model, gs1)
        np.testing.assert_allclose(result.beta_hat, exact.beta[:3], atol=2e-2)

    def test_uses_recorded_outputs(self):
        pmf, model, gs = fgm_setup()
        raw = mbhd.sample(pmf, 100, seed=9)
        samples = mbhd.SampleSet(rows=raw.rows, outputs=model.evaluate_rows(raw.rows))
        a = mbhd.estimate(samples, None, gs)
        b = mbhd.estimate(raw, model, gs)
        np.testing.assert_array_equal(a.beta_hat, b.beta_hat)
        with pytest.raises(ValueError):
            mbhd.estimate(raw, None, gs)

    def test_deterministic(self):
        pmf, model, gs = fgm_setup()
        r1 = mbhd.estimate(mbhd.sample(pmf, 1000, seed=21), model, gs)
        r2 = mbhd.estimate(mbhd.sample(pmf, 1000, seed=21), model, gs)
        np.testing.assert_array_equal(r1.beta_hat, r2.beta_hat)
        np.testing.assert_array_equal(r1.sigma_hat, r2.sigma_hat)

    def test_linearity_in_sample_pooling(self):
        pmf, model, gs = fgm_setup()
        s1 = mbhd.sample(pmf, 300, seed=1)
        s2 = mbhd.sample(pmf, 700, seed=2)
        pooled = mbhd.SampleSet(rows=np.vstack([s1.rows, s2.rows]))
        r1 = mbhd.estimate(s1, model, gs)
        r2 = mbhd.estimate(s2, model, gs)
        rp = mbhd.estimate(pooled, model, gs)
        weighted = (300 * r1.mu_hat + 700 * r2.mu_hat) / 1000
        np.testing.assert_allclose(rp.mu_hat, weighted, atol=1e-12)
        np.testing.assert_allclose(rp.beta_hat, gs.solve(weighted), atol=1e-12)

    def test_sigma_positive_semidefinite(self, rng):
        pmf = random_full_pmf(rng, 3)
        model = random_model(rng, 3)
        gs = mbhd.gram_matrix(pmf, mbhd.enumerate_subsets(3))
        result = mbhd.estimate(mbhd.sample(pmf, 50, seed=2), model, gs)
        eigenvalues = np.linalg.eigvalsh(result.sigma_hat)
        assert eigenvalues.min() >= -1e-10

    def test_off_support_sample_rejected(self, rng):
        # a Gram system over a hand-picked order on a degenerate table: the
        # pair subset has an unobservable pattern, so a sample hitting the
        # missing configuration cannot be scored
        gs = degenerate_gs_with_pair()
        bad = mbhd.SampleSet(rows=np.array([[0, 0], [1, 1]]))
        with pytest.raises(OffSupportSample):
            mbhd.estimate(bad, random_model(rng, 2), gs)

    def test_cap_mismatch_rejected(self):
        pmf, model, gs = fgm_setup(cap=None)
        samples = mbhd.sample(pmf, 10, seed=0)
        with pytest.raises(ValueError):
            mbhd.estimate(samples, model, gs, c=1)


class TestEmpiricalGram:
    def test_flagged_and_close_to_known_gram(self):
        pmf, model, gs = fgm_setup()
        samples = mbhd.sample(pmf, 50_000, seed=13)
        result = mbhd.estimate_empirical(samples, model)
        assert "empirical-gram" in result.flags
        np.testing.assert_allclose(result.gs.gamma, gs.gamma, atol=0.5)
        exact = mbhd.decompose(pmf, model)
        np.testing.assert_allclose(result.beta_hat, exact.beta, atol=2e-2)

    def test_unseen_pattern_prediction_fails(self):
        gs = degenerate_gs_with_pair()
        rows = np.array([[0, 0], [1, 0], [0, 1]] * 4)
        result = mbhd.estimate(
            mbhd.SampleSet(rows=rows), mbhd.BoolExprModel("x1*x2"), gs
        )
        with pytest.raises(ZeroMarginal):
            mbhd.predict_with_ci(result, (1, 1))


class TestPredictWithCI:
    def test_constant_integrand_gives_zero_width(self):
        pmf, model, gs = fgm_setup()
        rows = np.tile(np.array([[1, 1]], dtype=np.uint8), (50, 1))
        result = mbhd.estimate(mbhd.SampleSet(rows=rows), model, gs)
        pred = mbhd.predict_with_ci(result, (1, 1))
        assert pred.delta_n == pytest.approx(0.0, abs=1e-12)
        lo, hi = pred.interval
        assert lo == pytest.approx(hi, abs=1e-12) == pytest.approx(pred.g_hat, abs=1e-12)

    def test_halfwidth_uses_normal_quantile(self):
        pmf, model, gs = fgm_setup()
        result = mbhd.estimate(mbhd.sample(pmf, 400, seed=3), model, gs)
        pred = mbhd.predict_with_ci(result, (0, 1), level=0.95)
        assert pred.halfwidth == pytest.approx(1.959963985 * pred.delta_n, rel=1e-8)
        with pytest.raises(ValueError):
            mbhd.predict_with_ci(result, (0, 1), level=1.2)

    def test_delta_shrinks_like_root_n(self):
        pmf, model, gs = fgm_setup()
        deltas = {n: [] for n in (1000, 2000)}
        for rep in range(30):
            for n in deltas:
                r = mbhd.estimate(mbhd.sample(pmf, n, seed=100 + rep + n), model, gs)
                deltas[n].append(mbhd.predict_with_ci(r, (1, 1)).delta_n)
        ratio = np.mean(deltas[1000]) / np.mean(deltas[2000])
        assert ratio == pytest.approx(np.sqrt(2.0), rel=0.1)


class TestBernsteinBound:
    def test_vacuous_at_zero(self):
        pmf, model, gs = fgm_setup()
        bound = mbhd.bernstein_bound(gs, model, (1, 1), n=100, eps=0.0)
        assert bound.raw_bound == pytest.approx(np.exp(0.25), rel=1e-12)
        assert bound.bound == 1.0

    def test_monotone_in_eps_and_n(self):
        pmf, model, gs = fgm_setup()
        upper = mbhd.bernstein_bound(gs, model, (1, 1), n=100, eps=0.0).eps_max
        eps_grid = np.linspace(0.0, upper, 12)
        values = [
            mbhd.bernstein_bound(gs, model, (1, 1), n=500, eps=e).raw_bound
            for e in eps_grid
        ]
        assert all(a >= b for a, b in zip(values, values[1:]))
        by_n = [
            mbhd.bernstein_bound(gs, model, (1, 1), n=n, eps=upper / 2).raw_bound
            for n in (10, 100, 1000)
        ]
        assert by_n[0] > by_n[1] > by_n[2]

    def test_eps_window_enforced(self):
        pmf, model, gs = fgm_setup()
        upper = mbhd.bernstein_bound(gs, model, (1, 1), n=10, eps=0.0).eps_max
        with pytest.raises(EpsOutOfRange):
            mbhd.bernstein_bound(gs, model, (1, 1), n=10, eps=upper * 1.01)
        with pytest.raises(EpsOutOfRange):
            mbhd.bernstein_bound(gs, model, (1, 1), n=10, eps=-0.1)

    def test_reports_ingredients(self):
        pmf, model, gs = fgm_setup()
        bound = mbhd.bernstein_bound(gs, model, (0, 1), n=50, eps=0.0)
        assert bound.lambda_min == pytest.approx(gs.lambda_min)
        assert bound.sup_norm > 0
        assert bound.basis_norm > 0

    def test_needs_full_support(self, rng):
        pmf = mbhd.from_table([0.2, 0.4, 0.4, 0.0])
        dec = mbhd.degenerate_decompose(pmf, random_model(rng, 2))
        with pytest.raises(NotFullSupport):
            mbhd.bernstein_bound(dec.gs, random_model(rng, 2), (0, 0), n=10, eps=0.0)


class TestTruncationError:
    def test_full_cap_has_zero_bias(self):
        pmf, model, gs = fgm_setup(cap=2)
        exact = mbhd.decompose(pmf, model)
        est = mbhd.estimate(mbhd.sample(pmf, 200, seed=0), model, gs, c=2)
        rows = mbhd.truncation_error_report(
            exact, est, [(0, 0), (1, 1)], replications=50, seed=10
        )
        for row in rows:
            assert row.bias_sq == pytest.approx(0.0, abs=1e-16)

    def test_additive_independent_has_zero_bias_at_cap_one(self):
        pmf = mbhd.product_of_marginals([0.3, 0.6])
        model = mbhd.BoolExprModel("2*x1 - 3*x2")
        exact = mbhd.decompose(pmf, model)
        gs1 = mbhd.gram_matrix(pmf, mbhd.enumerate_subsets(2, cap=1))
        est = mbhd.estimate(mbhd.sample(pmf, 500, seed=1), model, gs1, c=1)
        rows = mbhd.truncation_error_report(
            exact, est, [(0, 0), (0, 1), (1, 1)], replications=60, seed=3
        )
        for row in rows:
            assert row.bias_sq == pytest.approx(0.0, abs=1e-18)
            assert row.within_three_se

    def test_dropped_interaction_biases_corner(self):
        pmf, model, _ = fgm_setup()
        exact = mbhd.decompose(pmf, model)
        gs1 = mbhd.gram_matrix(pmf, mbhd.enumerate_subsets(2, cap=1))
        est = mbhd.estimate(mbhd.sample(pmf, 500, seed=1), model, gs1, c=1)
        rows = mbhd.truncation_error_report(
            exact, est, [(1, 1)], replications=50, seed=4
        )
        assert rows[0].bias_sq > 1e-4

    def test_requires_exact_reference(self):
        pmf, model, gs = fgm_setup()
        truncated = mbhd.decompose(pmf, model, cap=1)
        est = mbhd.estimate(mbhd.sample(pmf, 100, seed=0), model, gs)
        with pytest.raises(ValueError):
            mbhd.truncation_error_report(truncated, est, [(0, 0)], replications=10, seed=0)
