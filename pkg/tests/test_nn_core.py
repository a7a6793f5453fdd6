import math

import numpy as np
import pytest

from rebalance.errors import ConfigError, DivergenceError, InputError
from rebalance.nn_core import (
    Layer,
    LayerSpec,
    MlpModel,
    TrainConfig,
    bce_terms,
    layer_specs,
    mlp_forward,
    mlp_gradient,
    mlp_init,
    mse_train,
)
from rebalance.oracles import gradient_check, oracle_numeric_gradient, relative_error


def _single(weight, bias, activation="linear"):
    weight = np.asarray(weight, dtype=float)
    spec = LayerSpec(weight.shape[1], weight.shape[0], activation)
    return MlpModel([Layer(spec, weight, np.asarray(bias, dtype=float))])


class TestConstruction:
    def test_same_seed_same_weights(self):
        a = mlp_init([LayerSpec(18, 9, "linear")], seed=7)
        b = mlp_init([LayerSpec(18, 9, "linear")], seed=7)
        for p, q in zip(a.parameters(), b.parameters()):
            np.testing.assert_array_equal(p, q)

    def test_wbc_regressor_widths(self):
        model = mlp_init(layer_specs([18, 48, 32, 16, 9]), seed=0)
        assert model.widths == [18, 48, 32, 16, 9]
        assert model.layers[0].weight.shape == (48, 18)
        assert all(np.all(layer.bias == 0) for layer in model.layers)

    def test_chain_mismatch_names_layers(self):
        with pytest.raises(ConfigError, match=r"\(0, 1\)"):
            mlp_init([LayerSpec(4, 8), LayerSpec(9, 2)], seed=0)

    def test_init_bounds(self):
        model = mlp_init([LayerSpec(6, 10, "relu"), LayerSpec(10, 3, "sigmoid")], seed=1)
        assert np.abs(model.layers[0].weight).max() <= math.sqrt(6 / 6)
        assert np.abs(model.layers[1].weight).max() <= math.sqrt(6 / 13)

    @pytest.mark.parametrize("slope", [0.0, 1.0, -0.1])
    def test_leaky_slope_range(self, slope):
        with pytest.raises(ConfigError):
            LayerSpec(2, 2, "leaky_relu", slope)

    def test_zero_epochs_rejected(self):
        with pytest.raises(ConfigError):
            TrainConfig(epochs=0)


class TestForward:
    def test_identity(self):
        model = _single(np.eye(2), [0, 0])
        np.testing.assert_array_equal(mlp_forward(model, [0.2, 0.8]), [0.2, 0.8])

    def test_relu_clips(self):
        model = _single([[1.0, 1.0]], [-5.0], "relu")
        np.testing.assert_array_equal(mlp_forward(model, [2.0, 2.0]), [0.0])

    def test_sigmoid_of_zero(self):
        model = _single([[0.0]], [0.0], "sigmoid")
        assert mlp_forward(model, [3.7])[0] == 0.5

    def test_width_mismatch(self):
        model = _single(np.eye(2), [0, 0])
        with pytest.raises(InputError):
            mlp_forward(model, [1.0, 2.0, 3.0])

    def test_forward_is_pure(self, rng):
        model = mlp_init(layer_specs([3, 5, 2]), seed=3)
        before = [p.copy() for p in model.parameters()]
        x = rng.normal(size=(4, 3))
        np.testing.assert_array_equal(mlp_forward(model, x), mlp_forward(model, x))
        for p, q in zip(before, model.parameters()):
            np.testing.assert_array_equal(p, q)


class TestGradient:
    def test_linear_neuron_analytic(self):
        w, b, x, t = 0.7, -0.2, 1.5, 2.0
        model = _single([[w]], [b])
        y = w * x + b
        grads = mlp_gradient(model, [x], [2 * (y - t)])
        assert grads.weights[0][0, 0] == pytest.approx(2 * (y - t) * x, abs=1e-15)
        assert grads.biases[0][0] == pytest.approx(2 * (y - t), abs=1e-15)

    def test_zero_seed_gives_zero_gradients(self, rng):
        model = mlp_init(layer_specs([4, 6, 6, 3]), seed=11)
        grads = mlp_gradient(model, rng.normal(size=4), np.zeros(3))
        assert all(np.all(g == 0) for g in grads.flat())

    def test_three_layer_matches_finite_differences(self, rng):
        model = mlp_init(layer_specs([3, 7, 5, 2], hidden="sigmoid"), seed=5)
        x = rng.normal(size=(5, 3))
        weights = rng.normal(size=(5, 2))
        analytic = mlp_gradient(model, x, weights).flat()
        numeric = oracle_numeric_gradient(model, x, weights, h=1e-5)
        assert max(relative_error(a, n) for a, n in zip(analytic, numeric)) < 1e-4

    def test_random_architectures(self):
        report = gradient_check(cases=100, seed=0)
        assert report.passed, report.worst_case
        assert len(report.errors) == 100


class TestTraining:
    X = np.array([[0.0], [0.25], [0.5], [0.75], [1.0]])

    def test_fits_line(self):
        model = mlp_init(layer_specs([1, 1]), seed=0)
        cfg = TrainConfig(epochs=2000, batch_size=5, learning_rate=0.5, optimizer="sgd")
        trained = mse_train(model, self.X, 2 * self.X, cfg)
        assert trained.layers[0].weight[0, 0] == pytest.approx(2.0, abs=1e-3)
        assert trained.layers[0].bias[0] == pytest.approx(0.0, abs=1e-3)

    def test_constant_target_bias(self):
        model = mlp_init(layer_specs([1, 1]), seed=4)
        cfg = TrainConfig(epochs=2000, batch_size=5, learning_rate=0.5, optimizer="sgd")
        trained = mse_train(model, self.X, np.full((5, 1), 0.3), cfg)
        assert trained.layers[0].bias[0] == pytest.approx(0.3, abs=1e-3)

    def test_returns_copy_and_is_reproducible(self, rng):
        X = rng.normal(size=(40, 4))
        Y = X[:, :2] * 0.5
        model = mlp_init(layer_specs([4, 8, 2]), seed=2)
        original = [p.copy() for p in model.parameters()]
        cfg = TrainConfig(epochs=20, batch_size=7, learning_rate=1e-2, shuffle_seed=9)
        a = mse_train(model, X, Y, cfg)
        b = mse_train(model, X, Y, cfg)
        for p, q in zip(a.parameters(), b.parameters()):
            np.testing.assert_array_equal(p, q)
        for p, q in zip(original, model.parameters()):
            np.testing.assert_array_equal(p, q)

    def test_epoch_callback_sees_every_epoch(self):
        seen = []
        model = mlp_init(layer_specs([1, 1]), seed=0)
        mse_train(model, self.X, self.X, TrainConfig(epochs=3), on_epoch=lambda e, loss: seen.append(e))
        assert seen == [0, 1, 2]

    def test_divergence_reports_epoch(self):
        X = np.full((8, 1), 1e3)
        model = mlp_init(layer_specs([1, 1]), seed=0)
        cfg = TrainConfig(epochs=500, batch_size=8, learning_rate=10.0, optimizer="sgd")
        with np.errstate(all="ignore"), pytest.raises(DivergenceError) as info:
            mse_train(model, X, X, cfg)
        assert 0 <= info.value.step < 500

    def test_row_mismatch(self):
        model = mlp_init(layer_specs([1, 1]), seed=0)
        with pytest.raises(InputError):
            mse_train(model, self.X, self.X[:3], TrainConfig(epochs=1))


class TestBceTerms:
    def test_half_half(self):
        disc, gen = bce_terms([0.5], [0.5])
        assert disc == pytest.approx(2 * math.log(0.5))
        assert gen == pytest.approx(math.log(0.5))

    def test_perfect_discriminator(self):
        disc, _ = bce_terms([1.0], [0.0])
        assert disc == pytest.approx(0.0, abs=1e-6)
        assert math.isfinite(disc)

    def test_saturating_generator_term(self):
        _, gen = bce_terms([0.5], [0.9])
        assert gen == pytest.approx(math.log(0.1))

    def test_empty(self):
        with pytest.raises(InputError):
            bce_terms([], [0.5])
