"""Weighted least squares, radial activations and the LWR estimator."""

import numpy as np
import pytest

from trajmix import LWR, RbfSet, SingularSystemError, polynomial_features
from trajmix.lwr import lwr_from_dict, lwr_to_dict, weighted_least_squares


class TestWeightedLeastSquares:
    def test_reduces_to_ordinary_ls(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(4, 4)) + 4 * np.eye(4)
        Y = rng.normal(size=(4, 2))
        A = weighted_least_squares(X, Y, np.ones(4), ridge=0.0)
        np.testing.assert_allclose(X @ A, Y, atol=1e-9)

    def test_recovers_exact_linear_map(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(50, 3))
        A0 = rng.normal(size=(3, 2))
        W = rng.uniform(0.1, 2.0, size=50)
        A = weighted_least_squares(X, X @ A0, W, ridge=0.0)
        np.testing.assert_allclose(A, A0, atol=1e-9)

    def test_matches_pseudo_inverse_oracle(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(80, 4))
        Y = rng.normal(size=(80, 3))
        W = rng.uniform(0.05, 1.0, size=80)
        A = weighted_least_squares(X, Y, W, ridge=0.0)
        # independent oracle: scaled-design pseudo-inverse solve
        sw = np.sqrt(W)
        oracle = np.linalg.pinv(X * sw[:, None]) @ (Y * sw[:, None])
        np.testing.assert_allclose(A, oracle, atol=1e-8)

    def test_singular_without_ridge(self):
        X = np.ones((10, 2))  # duplicated column
        Y = np.ones((10, 1))
        with pytest.raises(SingularSystemError):
            weighted_least_squares(X, Y, np.ones(10), ridge=0.0)
        # a ridge term makes the same system solvable
        A = weighted_least_squares(X, Y, np.ones(10), ridge=1e-6)
        assert np.all(np.isfinite(A))

    def test_weight_validation(self):
        X = np.ones((3, 1))
        with pytest.raises(ValueError):
            weighted_least_squares(X, X, np.array([1.0, -1.0, 1.0]))
        with pytest.raises(ValueError):
            weighted_least_squares(X, X, np.zeros(3))


class TestRbfSet:
    def test_activation_one_at_center(self):
        rbfs = RbfSet.uniform(0.0, 1.0, 5)
        act = rbfs.activations(rbfs.centers)
        np.testing.assert_allclose(np.diag(act), np.ones(5), rtol=1e-12)
        assert np.all(act > 0) and np.all(act <= 1.0)

    def test_midpoint_symmetry(self):
        rbfs = RbfSet(np.array([[-1.0], [1.0]]), 0.5)
        act = rbfs.rescaled_activations(np.array([[0.0]]))
        np.testing.assert_allclose(act, [[0.5, 0.5]], rtol=1e-12)

    def test_partition_of_unity(self):
        rng = np.random.default_rng(3)
        rbfs = RbfSet.uniform(-2.0, 3.0, 7)
        X = rng.uniform(-2, 3, size=(100, 1))
        sums = rbfs.rescaled_activations(X).sum(axis=1)
        np.testing.assert_allclose(sums, np.ones(100), atol=1e-12)

    def test_far_inputs_no_division_by_zero(self):
        rbfs = RbfSet.uniform(0.0, 1.0, 3, bandwidth=1e-4)
        act = rbfs.rescaled_activations(np.array([[150.0]]))
        assert np.all(np.isfinite(act))
        np.testing.assert_allclose(act.sum(), 1.0, atol=1e-12)


class TestPolynomialFeatures:
    def test_shapes_and_values(self):
        X = np.array([[2.0], [3.0]])
        feats = polynomial_features(X, 2)
        np.testing.assert_allclose(feats, [[1, 2, 4], [1, 3, 9]])

    def test_no_cross_terms(self):
        X = np.array([[2.0, 5.0]])
        feats = polynomial_features(X, 2)
        np.testing.assert_allclose(feats, [[1, 2, 5, 4, 25]])


class TestLwrEstimator:
    def test_degree_zero_constant_signal(self):
        t = np.linspace(0, 1, 60)
        y = np.full(60, 3.25)
        model = LWR(n_basis=5, degree=0, ridge=0.0).fit(t, y)
        np.testing.assert_allclose(model.predict(t), y, atol=1e-10)
        # every local model is the constant itself
        np.testing.assert_allclose(model.coef_[:, 0, 0], 3.25, atol=1e-10)

    def test_global_line_exact_for_any_k(self):
        t = np.linspace(0, 1, 100)
        y = -1.7 * t + 0.4
        for k in (2, 3, 8, 16):
            model = LWR(n_basis=k, degree=1, ridge=0.0).fit(t, y)
            np.testing.assert_allclose(model.predict(t), y, atol=1e-9)

    @pytest.mark.parametrize("degree", [0, 1, 2, 3])
    def test_polynomial_reproduction(self, degree):
        t = np.linspace(0, 1, 200)
        target = sum((i + 1.0) * t ** i for i in range(degree + 1))
        for k in (2, 4, 8):
            model = LWR(n_basis=k, degree=degree, ridge=0.0).fit(t, target)
            np.testing.assert_allclose(model.predict(t), target, atol=1e-8)

    def test_noisy_sine_matches_direct_oracle(self):
        # independent direct implementation: raw-RBF weighted fits blended
        # with normalized activations, solved by pseudo-inverse
        rng = np.random.default_rng(4)
        t = np.linspace(0, 1, 200)
        y = np.sin(2 * np.pi * t) + 0.05 * rng.normal(size=200)
        n_basis, degree = 8, 1

        centers = np.linspace(0, 1, n_basis)
        sigma2 = (1.0 / n_basis) ** 2
        raw = np.exp(-0.5 * (t[:, None] - centers) ** 2 / sigma2)
        norm = raw / raw.sum(axis=1, keepdims=True)
        feats = np.column_stack([np.ones_like(t), t])
        pred_oracle = np.zeros_like(t)
        for k in range(n_basis):
            sw = np.sqrt(norm[:, k])
            Ak = np.linalg.pinv(feats * sw[:, None]) @ (y * sw)
            pred_oracle += norm[:, k] * (feats @ Ak)
        rmse_oracle = np.sqrt(np.mean((pred_oracle - y) ** 2))

        model = LWR(n_basis=n_basis, degree=degree, ridge=0.0).fit(t, y)
        rmse = np.sqrt(np.mean((model.predict(t) - y) ** 2))
        assert rmse <= rmse_oracle + 1e-9

    def test_single_basis_is_plain_polynomial_regression(self):
        rng = np.random.default_rng(5)
        t = np.linspace(0, 1, 50)
        y = rng.normal(size=50)
        model = LWR(n_basis=1, degree=2, ridge=0.0).fit(t, y)
        feats = polynomial_features(t.reshape(-1, 1), 2)
        coef, *_ = np.linalg.lstsq(feats, y, rcond=None)
        np.testing.assert_allclose(model.predict(t), feats @ coef, atol=1e-8)

    def test_prediction_matches_batch_form(self):
        # batch-matrix blending of all local fits over a grid
        rng = np.random.default_rng(6)
        t = np.linspace(0, 1, 150)
        y = np.cos(3 * t) + 0.1 * rng.normal(size=150)
        model = LWR(n_basis=6, degree=1).fit(t, y)
        grid = np.linspace(0, 1, 200)
        act = model.rbfs_.rescaled_activations(grid.reshape(-1, 1))
        feats = polynomial_features(grid.reshape(-1, 1), 1)
        batch = np.zeros(200)
        for k in range(6):
            batch += act[:, k] * (feats @ model.coef_[k, :, 0])
        np.testing.assert_allclose(model.predict(grid), batch, rtol=1e-12)

    def test_residual_shrinks_with_more_bases(self):
        # at fixed degree, more bases buy accuracy on a sine
        t = np.linspace(0, 1, 400)
        y = np.sin(2 * np.pi * t)
        rmse = []
        for k in (2, 4, 8, 16):
            model = LWR(n_basis=k, degree=1, ridge=0.0).fit(t, y)
            rmse.append(np.sqrt(np.mean((model.predict(t) - y) ** 2)))
        assert rmse[-1] < rmse[0]
        assert all(b <= a * 1.01 for a, b in zip(rmse, rmse[1:]))

    def test_locality_of_perturbations(self):
        t = np.linspace(0, 1, 300)
        y = np.sin(2 * np.pi * t)
        model = LWR(n_basis=16, degree=1, ridge=0.0, bandwidth=1e-4).fit(t, y)
        y2 = y.copy()
        y2[-1] += 10.0  # perturb the right edge
        model2 = LWR(n_basis=16, degree=1, ridge=0.0, bandwidth=1e-4).fit(t, y2)
        # weight mass of the perturbed point around the left edge is < 1e-12
        left = np.linspace(0.0, 0.1, 20)
        delta = np.abs(model.predict(left) - model2.predict(left))
        assert np.max(delta) < 1e-9

    def test_multioutput(self):
        t = np.linspace(0, 1, 80)
        Y = np.column_stack([np.sin(2 * np.pi * t), np.cos(2 * np.pi * t)])
        model = LWR(n_basis=8, degree=2).fit(t, Y)
        pred = model.predict(t)
        assert pred.shape == (80, 2)
        assert np.sqrt(np.mean((pred - Y) ** 2)) < 0.05

    def test_singular_local_fit_names_offending_basis(self):
        X = np.zeros(10)  # identical inputs: degree-1 features are rank 1
        y = np.arange(10.0)
        model = LWR(n_basis=2, degree=1, ridge=0.0,
                    centers=[[0.0], [1.0]], bandwidth=0.1)
        with pytest.raises(SingularSystemError, match="basis 0"):
            model.fit(X, y)

    def test_unnormalized_fitting_weights_still_reproduce_lines(self):
        # the rescaling is optional for fitting; predictions stay rescaled
        t = np.linspace(0, 1, 120)
        y = 2.0 * t - 0.3
        model = LWR(n_basis=6, degree=1, ridge=0.0, rescaled=False).fit(t, y)
        np.testing.assert_allclose(model.predict(t), y, atol=1e-9)

    def test_multidim_input_needs_centers(self):
        X = np.random.default_rng(7).normal(size=(30, 2))
        with pytest.raises(ValueError):
            LWR(n_basis=4).fit(X, X[:, 0])

    def test_get_params_roundtrip(self):
        model = LWR(n_basis=5, degree=2, ridge=0.1)
        params = model.get_params()
        assert params["n_basis"] == 5 and params["degree"] == 2
        clone = LWR(**params)
        assert clone.ridge == 0.1


class TestSerialization:
    def test_round_trip_predictions(self):
        rng = np.random.default_rng(8)
        t = np.linspace(0, 1, 90)
        y = np.column_stack([np.sin(4 * t), t ** 2])
        model = LWR(n_basis=6, degree=1).fit(t, y)
        data = lwr_to_dict(model)
        assert data["version"] == "lwr-v1"
        back = lwr_from_dict(data)
        grid = np.linspace(0, 1, 37)
        np.testing.assert_array_equal(
            np.atleast_2d(model.predict(grid)), back.predict(grid)
        )

    def test_version_check(self):
        with pytest.raises(ValueError):
            lwr_from_dict({"version": "nope"})
