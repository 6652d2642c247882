import math

import numpy as np
import pytest

from smoothcure import SingularHessianError, fit_incidence, logistic_phi, soft_label_loglik
from smoothcure.incidence import soft_label_hessian, soft_label_score


def random_design(rng, n=40, p=2):
    return np.column_stack([np.ones(n)] + [rng.normal(size=n) for _ in range(p - 1)])


class TestLogisticPhi:
    def test_zero_gamma_is_half(self, rng):
        x = random_design(rng, n=6, p=3)
        assert np.allclose(logistic_phi(np.zeros(3), x), 0.5)

    def test_log_three(self):
        assert logistic_phi(np.array([math.log(3.0)]), np.array([1.0])) == pytest.approx(0.75)

    def test_extreme_linear_predictor_stable(self):
        x = np.array([[1.0]])
        ll = soft_label_loglik(np.array([-1000.0]), np.array([0.0]), x)
        assert ll == pytest.approx(-1000.0)
        assert 0.0 < logistic_phi(np.array([-50.0]), np.array([1.0])) < 1e-20


class TestSoftLabelLoglik:
    def test_symmetric_case(self, rng):
        x = random_design(rng, n=9)
        assert soft_label_loglik(np.zeros(2), np.full(9, 0.5), x) == pytest.approx(9 * math.log(0.5))

    def test_score_vanishes_at_matching_labels(self, rng):
        x = random_design(rng, n=12)
        gamma = np.array([0.3, -0.8])
        pihat = 1.0 - logistic_phi(gamma, x)
        assert np.max(np.abs(soft_label_score(gamma, pihat, x))) < 1e-12

    def test_three_point_against_fsum_oracle(self):
        x = np.array([[1.0, -0.4], [1.0, 0.2], [1.0, 1.1]])
        pihat = np.array([0.2, 0.7, 0.5])
        gamma = np.array([0.6, -1.2])
        terms = []
        for i in range(3):
            eta = gamma[0] * x[i, 0] + gamma[1] * x[i, 1]
            phi = 1.0 / (1.0 + math.exp(-eta))
            terms.append((1 - pihat[i]) * math.log(phi))
            terms.append(pihat[i] * math.log(1 - phi))
        assert soft_label_loglik(gamma, pihat, x) == pytest.approx(math.fsum(terms), rel=1e-12)

    def test_hard_labels_allowed(self, rng):
        x = random_design(rng, n=8)
        pihat = np.array([0.0, 1.0] * 4)
        assert np.isfinite(soft_label_loglik(np.array([0.2, 0.1]), pihat, x))


def grid_refine_oracle(pihat, x, spans, rounds=9, points=31):
    """Derivative-free nested grid search over the soft-label objective."""
    centers = np.zeros(x.shape[1])
    widths = np.asarray(spans, dtype=float)
    for _ in range(rounds):
        axes = [np.linspace(c - w, c + w, points) for c, w in zip(centers, widths)]
        best, best_val = None, -np.inf
        mesh = np.meshgrid(*axes, indexing="ij")
        flat = np.column_stack([m.ravel() for m in mesh])
        for gamma in flat:
            val = soft_label_loglik(gamma, pihat, x)
            if val > best_val:
                best, best_val = gamma, val
        centers = best
        widths = widths * (2.0 / (points - 1)) * 2.0
    return centers


class TestFitIncidence:
    def test_recovers_forced_maximizer(self, rng):
        x = random_design(rng, n=30)
        gamma_star = np.array([0.7, -1.1])
        pihat = 1.0 - logistic_phi(gamma_star, x)
        fit = fit_incidence(pihat, x)
        assert fit.converged
        assert np.allclose(fit.gamma, gamma_star, atol=1e-8)

    def test_intercept_only_half_labels(self):
        x = np.ones((6, 1))
        fit = fit_incidence(np.full(6, 0.5), x)
        assert fit.converged
        assert fit.gamma[0] == pytest.approx(0.0, abs=1e-12)

    def test_six_point_grid_oracle(self):
        x = np.array([[1.0, -1.2], [1.0, -0.5], [1.0, 0.1], [1.0, 0.4], [1.0, 0.9], [1.0, 1.5]])
        pihat = np.array([0.9, 0.6, 0.55, 0.3, 0.2, 0.15])
        fit = fit_incidence(pihat, x)
        oracle = grid_refine_oracle(pihat, x, spans=[4.0, 4.0])
        assert fit.converged
        assert np.allclose(fit.gamma, oracle, atol=1e-6)

    def test_rank_deficient_design_rejected(self):
        x = np.column_stack([np.ones(8), np.full(8, 2.0), np.full(8, 4.0)])
        with pytest.raises(SingularHessianError):
            fit_incidence(np.full(8, 0.4), x)

    def test_more_params_than_subjects_rejected(self, rng):
        x = random_design(rng, n=3, p=3)
        with pytest.raises(SingularHessianError):
            fit_incidence(np.full(3, 0.5), x)

    def test_max_iter_flagged(self, rng):
        x = random_design(rng, n=20)
        pihat = (x[:, 1] < 0).astype(float)  # perfectly separated labels
        fit = fit_incidence(pihat, x, max_iter=200)
        assert not fit.converged

    def test_label_complement_negates_fit(self, rng):
        for _ in range(10):
            x = random_design(rng, n=25)
            pihat = rng.uniform(0.05, 0.95, 25)
            up = fit_incidence(pihat, x)
            down = fit_incidence(1.0 - pihat, x)
            assert up.converged and down.converged
            assert np.allclose(up.gamma, -down.gamma, atol=1e-8)

    def test_permutation_invariance(self, rng):
        x = random_design(rng, n=18)
        pihat = rng.uniform(0.0, 1.0, 18)
        perm = rng.permutation(18)
        a = fit_incidence(pihat, x)
        b = fit_incidence(pihat[perm], x[perm])
        assert np.allclose(a.gamma, b.gamma, atol=1e-10)

    def test_converged_state_is_stationary_and_concave(self, rng):
        for _ in range(5):
            x = random_design(rng, n=30)
            pihat = rng.uniform(0.1, 0.9, 30)
            fit = fit_incidence(pihat, x, tol=1e-8)
            assert fit.converged
            assert fit.gradient_norm < 1e-8
            eigs = np.linalg.eigvalsh(soft_label_hessian(fit.gamma, pihat, x))
            assert np.all(eigs < 0)


class TestDerivatives:
    def test_score_and_hessian_match_finite_differences(self, rng):
        h = 1e-5
        for _ in range(10):
            n = int(rng.integers(10, 40))
            x = random_design(rng, n=n)
            pihat = rng.uniform(0.0, 1.0, n)
            gamma = rng.normal(0.0, 0.8, 2)
            score = soft_label_score(gamma, pihat, x)
            hess = soft_label_hessian(gamma, pihat, x)
            for j in range(2):
                e = np.zeros(2)
                e[j] = h
                fd = (soft_label_loglik(gamma + e, pihat, x) - soft_label_loglik(gamma - e, pihat, x)) / (2 * h)
                assert fd == pytest.approx(score[j], rel=1e-5, abs=1e-7)
                fd_row = (soft_label_score(gamma + e, pihat, x) - soft_label_score(gamma - e, pihat, x)) / (2 * h)
                assert np.allclose(fd_row, hess[j], rtol=1e-5, atol=1e-6)
