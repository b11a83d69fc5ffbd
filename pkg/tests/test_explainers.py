import numpy as np
import pytest

from astute.datasets import Dataset, gen_xor
from astute.explainers import (
    NeighborhoodConfig,
    explain_points,
    gaussian_kernel_weights,
    integrated_gradients,
    kernel_shap,
    lime,
    lime_defaults,
    smoothgrad,
    smoothgrad_defaults,
)
from astute.linalg import SingularSystemError
from astute.nn import Mlp, TrainConfig, forward, init_mlp, input_gradient, train

from oracles import shapley_values_exact


def linear_regressor(w, c=0.0):
    w = np.atleast_2d(np.asarray(w, dtype=np.float64))
    return Mlp([w], [np.full(w.shape[0], float(c))], output_mode="identity_regressor")


@pytest.fixture(scope="module")
def xor_model():
    ds = gen_xor(100, noise_sd=0.05, seed=0)
    m = init_mlp([2, 16, 2], activation="relu", seed=0)
    trained, _ = train(
        m, ds, TrainConfig(epochs=150, batch_size=8, learning_rate=0.05, seed=0)
    )
    return trained, ds


@pytest.fixture(scope="module")
def tanh_model():
    ds = gen_xor(100, noise_sd=0.05, seed=1)
    m = init_mlp([2, 8, 2], activation="tanh", seed=1)
    trained, _ = train(
        m, ds, TrainConfig(epochs=400, batch_size=8, learning_rate=0.2, seed=1)
    )
    return trained, ds


class TestIntegratedGradients:
    def test_x_equal_baseline_gives_zero(self):
        m = linear_regressor([2.0, -1.0])
        x = np.array([0.4, 0.9])
        exp = integrated_gradients(m, x, baseline=x.copy(), steps=8, target=0)
        np.testing.assert_array_equal(exp.attributions, np.zeros(2))

    def test_linear_model_analytic(self):
        m = linear_regressor([2.0, -1.0])
        exp = integrated_gradients(
            m, [1.0, 1.0], baseline=[0.0, 0.0], steps=1, target=0
        )
        np.testing.assert_allclose(exp.attributions, [2.0, -1.0], atol=1e-15)

    def test_completeness_on_trained_net(self, xor_model):
        model, ds = xor_model
        baseline = np.zeros(2)
        f_base = forward(model, baseline)
        for i in range(20):
            x = ds.X[i]
            target = int(np.argmax(forward(model, x)))
            exp = integrated_gradients(model, x, baseline, steps=1000, target=target)
            total = float(exp.attributions.sum())
            expected = float(forward(model, x)[target] - f_base[target])
            assert abs(total - expected) < 1e-3

    def test_step_convergence(self, tanh_model):
        model, ds = tanh_model
        x = ds.X[3]
        a = integrated_gradients(model, x, steps=1000).attributions
        b = integrated_gradients(model, x, steps=2000).attributions
        assert np.max(np.abs(a - b)) < 1e-4

    def test_invalid_steps_rejected(self):
        with pytest.raises(ValueError):
            integrated_gradients(linear_regressor([1.0]), [1.0], steps=0, target=0)


class TestSmoothGrad:
    def test_zero_sd_equals_plain_gradient(self, xor_model):
        model, ds = xor_model
        x = ds.X[5]
        cfg = NeighborhoodConfig(num_samples=10, sd=0.0, kernel_sigma=1.0, seed=3)
        exp = smoothgrad(model, x, cfg, target=1)
        np.testing.assert_array_equal(exp.attributions, input_gradient(model, x, 1))

    def test_linear_model_gives_weights_any_seed(self):
        m = linear_regressor([0.5, 2.0, -3.0])
        x = np.array([0.1, 0.2, 0.3])
        for seed in (0, 99):
            cfg = NeighborhoodConfig(num_samples=25, sd=0.7, kernel_sigma=1.0, seed=seed)
            exp = smoothgrad(m, x, cfg, target=0)
            np.testing.assert_allclose(exp.attributions, [0.5, 2.0, -3.0], rtol=1e-12)

    def test_same_seed_identical(self, xor_model):
        model, ds = xor_model
        cfg = NeighborhoodConfig(num_samples=30, sd=0.2, kernel_sigma=1.0, seed=7)
        a = smoothgrad(model, ds.X[0], cfg).attributions
        b = smoothgrad(model, ds.X[0], cfg).attributions
        np.testing.assert_array_equal(a, b)


class TestLime:
    def test_kernel_weight_of_x_against_itself_is_one(self):
        x = np.array([0.3, -1.2])
        points = np.vstack([x, x + 1.0])
        w = gaussian_kernel_weights(x, points, kernel_sigma=0.8)
        assert w[0] == 1.0
        assert w[1] < 1.0

    def test_recovers_linear_model(self):
        m = linear_regressor([1.5, -2.0, 0.25], c=0.7)
        x = np.array([0.2, 0.4, -0.1])
        cfg = NeighborhoodConfig(num_samples=40, sd=0.5, kernel_sigma=1.0, seed=0)
        exp = lime(m, x, cfg, target=0, ridge=0.0)
        np.testing.assert_allclose(exp.attributions, [1.5, -2.0, 0.25], atol=1e-6)

    def test_constant_model_zero_coefficients(self):
        m = linear_regressor([0.0, 0.0], c=3.0)
        cfg = NeighborhoodConfig(num_samples=20, sd=0.3, kernel_sigma=1.0, seed=2)
        exp = lime(m, [1.0, -1.0], cfg, target=0)
        np.testing.assert_allclose(exp.attributions, 0.0, atol=1e-10)

    def test_degenerate_neighborhood_raises(self, xor_model):
        model, ds = xor_model
        cfg = NeighborhoodConfig(num_samples=10, sd=0.0, kernel_sigma=1.0, seed=0)
        with pytest.raises(SingularSystemError):
            lime(model, ds.X[0], cfg)

    def test_small_neighborhood_recovers_gradient_on_tanh_net(self, tanh_model):
        model, ds = tanh_model
        cfg = NeighborhoodConfig(num_samples=60, sd=1e-3, kernel_sigma=1.0, seed=4)
        for i in (0, 7, 19):
            x = ds.X[i]
            target = int(np.argmax(forward(model, x)))
            exp = lime(model, x, cfg, target=target)
            grad = input_gradient(model, x, target)
            assert np.max(np.abs(exp.attributions - grad)) < 5e-2

    def test_same_seed_identical(self, tanh_model):
        model, ds = tanh_model
        cfg = lime_defaults(ds, seed=5, num_samples=30)
        a = lime(model, ds.X[2], cfg).attributions
        b = lime(model, ds.X[2], cfg).attributions
        np.testing.assert_array_equal(a, b)


class TestKernelShap:
    @pytest.fixture()
    def background(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(-1, 1, size=(40, 3))
        return Dataset("bg", x, np.zeros(40, dtype=np.int64), num_classes=1)

    def test_linear_model_analytic_shapley(self, background):
        w = np.array([2.0, -1.0, 0.5])
        m = linear_regressor(w, c=0.3)
        x = np.array([0.9, -0.4, 0.2])
        exp = kernel_shap(m, x, background, num_coalitions=32, seed=0, target=0)
        expected = w * (x - background.X.mean(axis=0))
        np.testing.assert_allclose(exp.attributions, expected, atol=1e-4)

    def test_x_at_background_mean_gives_zero(self, background):
        m = linear_regressor([2.0, -1.0, 0.5])
        x = background.X.mean(axis=0)
        exp = kernel_shap(m, x, background, num_coalitions=32, seed=0, target=0)
        np.testing.assert_allclose(exp.attributions, 0.0, atol=1e-10)

    def test_duplicated_features_get_equal_attributions(self):
        # symmetric model over duplicated features: f = x0 + x1
        m = linear_regressor([1.0, 1.0])
        rng = np.random.default_rng(1)
        base = rng.uniform(0, 1, size=(30, 1))
        bg = Dataset("dup", np.hstack([base, base]), np.zeros(30, dtype=np.int64), num_classes=1)
        x = np.array([0.8, 0.8])
        exp = kernel_shap(m, x, bg, num_coalitions=8, seed=0, target=0)
        assert abs(exp.attributions[0] - exp.attributions[1]) < 1e-6

    def test_efficiency_enforced_enumerated_and_sampled(self, xor_model):
        model, ds = xor_model
        for d, num_coalitions in ((2, 8), (2, 64)):
            x = ds.X[11]
            target = int(np.argmax(forward(model, x)))
            exp = kernel_shap(model, x, ds, num_coalitions=num_coalitions, seed=3, target=target)
            fx = float(forward(model, x)[target])
            from astute.nn import forward_batch

            base = float(forward_batch(model, ds.X)[:, target].mean())
            assert abs(exp.attributions.sum() - (fx - base)) < 1e-6

    def test_efficiency_on_sampled_high_dimensional_path(self):
        rng = np.random.default_rng(9)
        d = 12
        m = init_mlp([d, 6, 3], activation="tanh", seed=2)
        bg = Dataset(
            "bg", rng.uniform(-1, 1, size=(25, d)), np.zeros(25, dtype=np.int64), num_classes=1
        )
        x = rng.uniform(-1, 1, size=d)
        exp = kernel_shap(m, x, bg, num_coalitions=d + 30, seed=0, target=1)
        from astute.nn import forward_batch

        base = float(forward_batch(m, bg.X)[:, 1].mean())
        fx = float(forward(m, x)[1])
        assert abs(exp.attributions.sum() - (fx - base)) < 1e-6

    def test_full_enumeration_matches_exact_shapley_of_masked_game(self, xor_model):
        # with full coalition enumeration the constrained kernel regression
        # equals the Shapley values of the imputation game whose endpoints
        # are anchored at the base value and f(x)
        rng = np.random.default_rng(4)
        d = 4
        m = init_mlp([d, 5, 3], activation="tanh", seed=8)
        bg_x = rng.uniform(-1, 1, size=(20, d))
        bg = Dataset("bg", bg_x, np.zeros(20, dtype=np.int64), num_classes=1)
        x = rng.uniform(-1, 1, size=d)
        target = 2
        exp = kernel_shap(m, x, bg, num_coalitions=2**d, seed=0, target=target)

        from astute.nn import forward_batch

        base = float(forward_batch(m, bg_x)[:, target].mean())
        fx = float(forward(m, x)[target])
        bg_mean = bg_x.mean(axis=0)

        def game(subset):
            if len(subset) == 0:
                return base
            if len(subset) == d:
                return fx
            point = bg_mean.copy()
            idx = sorted(subset)
            point[idx] = x[idx]
            return float(forward(m, point)[target])

        expected = shapley_values_exact(game, d)
        np.testing.assert_allclose(exp.attributions, expected, atol=1e-8)

    def test_empty_background_rejected(self):
        m = linear_regressor([1.0, 1.0])
        with pytest.raises(ValueError, match="background"):
            kernel_shap(m, [1.0, 1.0], np.zeros((0, 2)), num_coalitions=8)

    def test_budget_below_minimum_rejected(self, background):
        m = linear_regressor([1.0, 1.0, 1.0])
        with pytest.raises(ValueError, match="num_coalitions"):
            kernel_shap(m, [1.0, 1.0, 1.0], background, num_coalitions=3)

    def test_same_seed_identical(self, xor_model):
        model, ds = xor_model
        a = kernel_shap(model, ds.X[3], ds, num_coalitions=16, seed=2).attributions
        b = kernel_shap(model, ds.X[3], ds, num_coalitions=16, seed=2).attributions
        np.testing.assert_array_equal(a, b)


class TestExplainPoints:
    def test_shapes_and_determinism(self, xor_model):
        model, ds = xor_model
        pts = ds.X[:12]
        for method, kwargs in (
            ("ig", {"ig_steps": 16}),
            ("sg", {"neighborhood": smoothgrad_defaults(ds, num_samples=10)}),
            ("lime", {"neighborhood": lime_defaults(ds, num_samples=20)}),
            ("shap", {"background": ds, "num_coalitions": 8}),
        ):
            a = explain_points(model, pts, method, seed=5, **kwargs)
            b = explain_points(model, pts, method, seed=5, **kwargs)
            assert a.shape == (12, 2)
            np.testing.assert_array_equal(a, b)

    def test_unknown_method_rejected(self, xor_model):
        model, ds = xor_model
        with pytest.raises(ValueError, match="unknown explainer"):
            explain_points(model, ds.X[:3], "gradcam")
