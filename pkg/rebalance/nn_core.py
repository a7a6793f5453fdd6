"""Dense feed-forward networks on numpy.

Forward pass, reverse-mode gradients, MSE training and the adversarial
log-objectives. Everything here works on row-major batches: a batch is an
(rows x width) matrix, and a single vector is treated as a batch of one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from .errors import ConfigError, DivergenceError, InputError

log = logging.getLogger(__name__)

ACTIVATIONS = ("relu", "leaky_relu", "sigmoid", "linear")

# discriminator outputs are clamped to [PROB_EPS, 1 - PROB_EPS] before logs
PROB_EPS = 1e-7

EpochCB = Optional[Callable[[int, float], None]]


# ----------------------------
# Types
# ----------------------------

@dataclass(frozen=True)
class LayerSpec:
    input_width: int
    output_width: int
    activation: str = "relu"
    slope: float = 0.2  # leaky_relu only

    def __post_init__(self) -> None:
        if self.input_width < 1 or self.output_width < 1:
            raise ConfigError(
                f"layer widths must be >= 1, got {self.input_width}->{self.output_width}"
            )
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}; expected one of {ACTIVATIONS}")
        if self.activation == "leaky_relu" and not (0.0 < self.slope < 1.0):
            raise ConfigError(f"leaky_relu slope must lie in (0, 1), got {self.slope}")


@dataclass
class Layer:
    spec: LayerSpec
    weight: np.ndarray  # output_width x input_width
    bias: np.ndarray  # output_width


@dataclass
class MlpModel:
    layers: List[Layer]
    seed: int = 0

    @property
    def input_width(self) -> int:
        return self.layers[0].spec.input_width

    @property
    def output_width(self) -> int:
        return self.layers[-1].spec.output_width

    @property
    def widths(self) -> List[int]:
        return [self.input_width] + [layer.spec.output_width for layer in self.layers]

    def parameters(self) -> List[np.ndarray]:
        out: List[np.ndarray] = []
        for layer in self.layers:
            out.append(layer.weight)
            out.append(layer.bias)
        return out

    def copy(self) -> "MlpModel":
        return MlpModel(
            layers=[Layer(l.spec, l.weight.copy(), l.bias.copy()) for l in self.layers],
            seed=self.seed,
        )

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.parameters())


@dataclass
class Gradients:
    """Gradient structure mirroring an MlpModel's weights and biases."""

    weights: List[np.ndarray]
    biases: List[np.ndarray]

    def flat(self) -> List[np.ndarray]:
        out: List[np.ndarray] = []
        for gw, gb in zip(self.weights, self.biases):
            out.append(gw)
            out.append(gb)
        return out

    def __add__(self, other: "Gradients") -> "Gradients":
        return Gradients(
            weights=[a + b for a, b in zip(self.weights, other.weights)],
            biases=[a + b for a, b in zip(self.biases, other.biases)],
        )


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    shuffle_seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.optimizer not in ("sgd", "adam"):
            raise ConfigError(f"optimizer must be 'sgd' or 'adam', got {self.optimizer!r}")


def layer_specs(
    widths: Sequence[int],
    hidden: str = "relu",
    output: str = "linear",
    slope: float = 0.2,
) -> List[LayerSpec]:
    """Build a chained spec list from a width list such as [18, 48, 32, 16, 9]."""
    widths = [int(w) for w in widths]
    if len(widths) < 2:
        raise ConfigError(f"an architecture needs at least input and output widths, got {widths}")
    specs = []
    for i in range(len(widths) - 1):
        act = output if i == len(widths) - 2 else hidden
        specs.append(LayerSpec(widths[i], widths[i + 1], act, slope))
    return specs


# ----------------------------
# Construction
# ----------------------------

def mlp_init(specs: Sequence[LayerSpec], seed: int) -> MlpModel:
    if not specs:
        raise ConfigError("an MLP needs at least one layer")
    for i in range(len(specs) - 1):
        if specs[i].output_width != specs[i + 1].input_width:
            raise ConfigError(
                f"layer width mismatch between layers ({i}, {i + 1}): "
                f"{specs[i].output_width} != {specs[i + 1].input_width}"
            )

    rng = np.random.default_rng(seed)
    layers = []
    for spec in specs:
        fan_in, fan_out = spec.input_width, spec.output_width
        if spec.activation == "relu":
            bound = np.sqrt(6.0 / fan_in)
        else:
            bound = np.sqrt(6.0 / (fan_in + fan_out))
        weight = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        layers.append(Layer(spec, weight, np.zeros(fan_out)))
    return MlpModel(layers=layers, seed=int(seed))


# ----------------------------
# Forward / backward
# ----------------------------

def _activate(z: np.ndarray, spec: LayerSpec) -> np.ndarray:
    if spec.activation == "relu":
        return np.maximum(z, 0.0)
    if spec.activation == "leaky_relu":
        return np.where(z > 0, z, spec.slope * z)
    if spec.activation == "sigmoid":
        return expit(z)
    return z


def _activation_grad(z: np.ndarray, a: np.ndarray, spec: LayerSpec) -> np.ndarray:
    if spec.activation == "relu":
        return (z > 0).astype(float)
    if spec.activation == "leaky_relu":
        return np.where(z > 0, 1.0, spec.slope)
    if spec.activation == "sigmoid":
        return a * (1.0 - a)
    return np.ones_like(z)


def _as_batch(model: MlpModel, x) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    is_vector = arr.ndim == 1
    if is_vector:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != model.input_width:
        raise InputError(
            f"input width {arr.shape[-1] if arr.ndim else 0} does not match model input width {model.input_width}"
        )
    return arr, is_vector


def _forward_cache(model: MlpModel, X: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    pre: List[np.ndarray] = []
    acts: List[np.ndarray] = [X]
    a = X
    for layer in model.layers:
        z = a @ layer.weight.T + layer.bias
        a = _activate(z, layer.spec)
        pre.append(z)
        acts.append(a)
    return pre, acts


def _backprop(
    model: MlpModel,
    pre: List[np.ndarray],
    acts: List[np.ndarray],
    grad_out: np.ndarray,
) -> Tuple[Gradients, np.ndarray]:
    n_layers = len(model.layers)
    weights: List[np.ndarray] = [np.empty(0)] * n_layers
    biases: List[np.ndarray] = [np.empty(0)] * n_layers
    delta = grad_out
    for i in reversed(range(n_layers)):
        layer = model.layers[i]
        dz = delta * _activation_grad(pre[i], acts[i + 1], layer.spec)
        weights[i] = dz.T @ acts[i]
        biases[i] = dz.sum(axis=0)
        delta = dz @ layer.weight
    return Gradients(weights, biases), delta


def mlp_forward(model: MlpModel, x) -> np.ndarray:
    """Evaluate the network on a vector or on a batch of row vectors."""
    X, is_vector = _as_batch(model, x)
    _, acts = _forward_cache(model, X)
    out = acts[-1]
    return out[0] if is_vector else out


def backward(model: MlpModel, x, loss_grad_at_output) -> Tuple[Gradients, np.ndarray]:
    """Gradients w.r.t. parameters and w.r.t. the input, summed over the batch."""
    X, is_vector = _as_batch(model, x)
    G = np.asarray(loss_grad_at_output, dtype=float)
    if is_vector:
        G = G.reshape(1, -1)
    if G.shape != (X.shape[0], model.output_width):
        raise InputError(
            f"output gradient shape {G.shape} does not match ({X.shape[0]}, {model.output_width})"
        )
    pre, acts = _forward_cache(model, X)
    grads, grad_input = _backprop(model, pre, acts, G)
    return grads, (grad_input[0] if is_vector else grad_input)


def mlp_gradient(model: MlpModel, x, loss_grad_at_output) -> Gradients:
    return backward(model, x, loss_grad_at_output)[0]


# ----------------------------
# Optimizers
# ----------------------------

class Sgd:
    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate

    def step(self, model: MlpModel, grads: Gradients) -> None:
        for param, grad in zip(model.parameters(), grads.flat()):
            param -= self.learning_rate * grad


class Adam:
    def __init__(
        self,
        model: MlpModel,
        learning_rate: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in model.parameters()]
        self.v = [np.zeros_like(p) for p in model.parameters()]

    def step(self, model: MlpModel, grads: Gradients) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for i, (param, grad) in enumerate(zip(model.parameters(), grads.flat())):
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad * grad
            param -= self.learning_rate * (self.m[i] / c1) / (np.sqrt(self.v[i] / c2) + self.eps)


def make_optimizer(
    model: MlpModel,
    kind: str,
    learning_rate: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
):
    if kind == "sgd":
        return Sgd(learning_rate)
    if kind == "adam":
        return Adam(model, learning_rate, beta1, beta2, eps)
    raise ConfigError(f"unknown optimizer {kind!r}")


# ----------------------------
# Losses and training
# ----------------------------

def mse_loss(pred: np.ndarray, target: np.ndarray) -> float:
    return float(np.mean((pred - target) ** 2))


def mse_train(
    model: MlpModel,
    inputs,
    targets,
    cfg: TrainConfig,
    on_epoch: EpochCB = None,
) -> MlpModel:
    """Minibatch gradient descent on mean squared error.

    Returns a trained copy; `model` itself is left untouched. The last
    partial minibatch of each epoch is used as-is.
    """
    X = np.asarray(inputs, dtype=float)
    Y = np.asarray(targets, dtype=float)
    if X.ndim != 2 or Y.ndim != 2:
        raise InputError("inputs and targets must be matrices")
    if X.shape[0] != Y.shape[0]:
        raise InputError(f"row count mismatch: {X.shape[0]} inputs vs {Y.shape[0]} targets")
    if X.shape[0] == 0:
        raise InputError("cannot train on zero rows")
    if X.shape[1] != model.input_width or Y.shape[1] != model.output_width:
        raise InputError(
            f"data widths ({X.shape[1]}, {Y.shape[1]}) do not match model "
            f"({model.input_width}, {model.output_width})"
        )

    net = model.copy()
    opt = make_optimizer(net, cfg.optimizer, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps)
    rng = np.random.default_rng(cfg.shuffle_seed)
    n = X.shape[0]

    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            pre, acts = _forward_cache(net, X[idx])
            pred = acts[-1]
            grad_out = 2.0 * (pred - Y[idx]) / pred.size
            grads, _ = _backprop(net, pre, acts, grad_out)
            opt.step(net, grads)

        loss = mse_loss(mlp_forward(net, X), Y)
        if not np.isfinite(loss):
            raise DivergenceError("non-finite training loss", epoch)
        log.debug("epoch %d mse %.6g", epoch, loss)
        if on_epoch:
            on_epoch(epoch, loss)
    return net


def clamp_probability(p) -> np.ndarray:
    return np.clip(np.asarray(p, dtype=float), PROB_EPS, 1.0 - PROB_EPS)


def bce_terms(d_real, d_fake) -> Tuple[float, float]:
    """(disc_objective, gen_saturating_objective) for discriminator outputs.

    disc_objective = mean(log D(x)) + mean(log(1 - D(G(z)))), which the
    discriminator ascends; gen_saturating_objective = mean(log(1 - D(G(z)))).
    """
    r = np.asarray(d_real, dtype=float).ravel()
    f = np.asarray(d_fake, dtype=float).ravel()
    if r.size == 0 or f.size == 0:
        raise InputError("bce_terms needs non-empty real and fake outputs")
    r = clamp_probability(r)
    f = clamp_probability(f)
    gen = float(np.mean(np.log1p(-f)))
    disc = float(np.mean(np.log(r))) + gen
    return disc, gen
