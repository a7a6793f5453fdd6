"""Adversarial over-samplers: DA-SMOTE and the plain GAN baseline.

Both run the same minibatch loop: k discriminator ascent steps, then one
generator step, per outer iteration. They differ only in the latent sampler:
DA-SMOTE feeds concatenated minority pairs, the GAN feeds uniform noise.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .deep_smote import synthesize_from_pairs
from .errors import ConfigError, DivergenceError, InputError, InsufficientMinorityError
from .nn_core import (
    Gradients,
    LayerSpec,
    MlpModel,
    backward,
    bce_terms,
    clamp_probability,
    layer_specs,
    make_optimizer,
    mlp_forward,
    mlp_init,
)
from .pairs import candidate_pairs, concat_pairs, latent_capacity, sample_pairs
from .seeding import derive_seed

log = logging.getLogger(__name__)

__all__ = [
    "AdversarialConfig",
    "AdversarialRun",
    "generator_specs",
    "discriminator_specs",
    "pair_latent",
    "noise_latent",
    "discriminator_step",
    "generator_step",
    "train_adversarial",
    "train_da_smote",
    "train_gan_baseline",
    "oversample_da_smote",
    "oversample_gan",
    "latent_capacity",
]

GEN_LOSS_MODES = ("saturating", "non_saturating")

# (rng, m) -> m x latent_width
LatentSampler = Callable[[np.random.Generator, int], np.ndarray]
IterationCB = Optional[Callable[[int, Dict[str, float]], None]]


def generator_specs(widths: Sequence[int]) -> List[LayerSpec]:
    return layer_specs(widths, hidden="relu", output="linear")


def discriminator_specs(widths: Sequence[int], slope: float = 0.2) -> List[LayerSpec]:
    return layer_specs(widths, hidden="leaky_relu", output="sigmoid", slope=slope)


@dataclass
class AdversarialConfig:
    iterations: int
    gen_arch: List[LayerSpec]
    disc_arch: List[LayerSpec]
    disc_steps_k: int = 1
    minibatch_m: int = 32
    gen_loss_mode: str = "non_saturating"
    rng_seed: int = 0
    gen_learning_rate: float = 2e-4
    disc_learning_rate: float = 2e-4
    optimizer: str = "adam"
    label_smoothing: float = 0.0

    def __post_init__(self) -> None:
        if self.iterations < 1 or self.disc_steps_k < 1 or self.minibatch_m < 1:
            raise ConfigError("iterations, disc_steps_k and minibatch_m must be >= 1")
        if self.gen_loss_mode not in GEN_LOSS_MODES:
            raise ConfigError(f"gen_loss_mode must be one of {GEN_LOSS_MODES}, got {self.gen_loss_mode!r}")
        if not (0.0 <= self.label_smoothing < 0.5):
            raise ConfigError(f"label_smoothing must lie in [0, 0.5), got {self.label_smoothing}")
        if not self.gen_arch or not self.disc_arch:
            raise ConfigError("generator and discriminator architectures must be non-empty")

    def check_widths(self, feature_dim_n: int, latent_width: int) -> None:
        gen_in = self.gen_arch[0].input_width
        gen_out = self.gen_arch[-1].output_width
        if gen_out != feature_dim_n:
            raise ConfigError(f"generator output width {gen_out} != feature width {feature_dim_n}")
        if gen_in != latent_width:
            raise ConfigError(f"generator input width {gen_in} != latent width {latent_width}")
        if self.disc_arch[0].input_width != feature_dim_n:
            raise ConfigError(
                f"discriminator input width {self.disc_arch[0].input_width} != feature width {feature_dim_n}"
            )
        if self.disc_arch[-1].output_width != 1:
            raise ConfigError("discriminator output width must be 1")


@dataclass
class AdversarialRun:
    generator: MlpModel
    discriminator: MlpModel
    history: List[Dict[str, float]] = field(default_factory=list)


# ----------------------------
# Latent samplers
# ----------------------------

def pair_latent(minority: np.ndarray, neighborhood_k: Optional[int] = None) -> LatentSampler:
    """Minibatches of concatenated minority pairs, distinct within a batch."""
    candidates = candidate_pairs(minority, neighborhood_k)

    def draw(rng: np.random.Generator, m: int) -> np.ndarray:
        pairs = sample_pairs(candidates, min(m, len(candidates)), rng)
        return concat_pairs(minority, pairs)

    return draw


def noise_latent(noise_dim: int) -> LatentSampler:
    if noise_dim < 1:
        raise InputError(f"noise_dim must be >= 1, got {noise_dim}")

    def draw(rng: np.random.Generator, m: int) -> np.ndarray:
        return rng.uniform(-1.0, 1.0, size=(m, noise_dim))

    return draw


# ----------------------------
# Single steps
# ----------------------------

def discriminator_step(
    discriminator: MlpModel,
    optimizer,
    real: np.ndarray,
    fake: np.ndarray,
    label_smoothing: float = 0.0,
) -> float:
    """One ascent step on mean log D(x) + mean log(1 - D(G(z))).

    Implemented as descent on the negated objective. Returns the objective
    measured before the step.
    """
    p_real = clamp_probability(mlp_forward(discriminator, real))
    p_fake = clamp_probability(mlp_forward(discriminator, fake))
    target = 1.0 - label_smoothing
    # d(-objective)/dp for each output, with the real-side target smoothed
    g_real = (-target / p_real + (1.0 - target) / (1.0 - p_real)) / len(real)
    g_fake = (1.0 / (1.0 - p_fake)) / len(fake)
    grads: Gradients = backward(discriminator, real, g_real)[0] + backward(discriminator, fake, g_fake)[0]
    optimizer.step(discriminator, grads)
    return bce_terms(p_real, p_fake)[0]


def generator_step(
    generator: MlpModel,
    discriminator: MlpModel,
    optimizer,
    latent: np.ndarray,
    mode: str,
) -> float:
    """One generator update with the discriminator frozen.

    saturating descends mean log(1 - D(G(z))); non_saturating ascends
    mean log D(G(z)). Returns the generator objective before the step.
    """
    fake = mlp_forward(generator, latent)
    p = clamp_probability(mlp_forward(discriminator, fake))
    m = len(latent)
    if mode == "saturating":
        g_p = -1.0 / (1.0 - p) / m
        value = float(np.mean(np.log1p(-p)))
    else:
        g_p = -1.0 / p / m
        value = float(np.mean(np.log(p)))
    _, g_fake = backward(discriminator, fake, g_p)
    grads, _ = backward(generator, latent, g_fake)
    optimizer.step(generator, grads)
    return value


# ----------------------------
# Training loop
# ----------------------------

def train_adversarial(
    minority,
    cfg: AdversarialConfig,
    latent_sampler: LatentSampler,
    on_iteration: IterationCB = None,
) -> AdversarialRun:
    X = np.asarray(minority, dtype=float)
    if X.ndim != 2:
        raise InputError("minority must be a matrix")
    w, n = X.shape
    if w < 2:
        raise InsufficientMinorityError(w)
    cfg.check_widths(n, cfg.gen_arch[0].input_width)

    generator = mlp_init(cfg.gen_arch, derive_seed(cfg.rng_seed, "generator"))
    discriminator = mlp_init(cfg.disc_arch, derive_seed(cfg.rng_seed, "discriminator"))
    opt_g = make_optimizer(generator, cfg.optimizer, cfg.gen_learning_rate)
    opt_d = make_optimizer(discriminator, cfg.optimizer, cfg.disc_learning_rate)
    rng = np.random.default_rng(derive_seed(cfg.rng_seed, "minibatches"))

    m_real = min(cfg.minibatch_m, w)
    history: List[Dict[str, float]] = []
    for it in range(cfg.iterations):
        disc_obj = 0.0
        for _ in range(cfg.disc_steps_k):
            latent = latent_sampler(rng, cfg.minibatch_m)
            fake = mlp_forward(generator, latent)
            real = X[rng.choice(w, size=m_real, replace=False)]
            disc_obj = discriminator_step(discriminator, opt_d, real, fake, cfg.label_smoothing)

        latent = latent_sampler(rng, cfg.minibatch_m)
        gen_obj = generator_step(generator, discriminator, opt_g, latent, cfg.gen_loss_mode)

        if not (generator.is_finite() and discriminator.is_finite()):
            raise DivergenceError("non-finite adversarial parameters", it)
        record = {"iteration": float(it), "disc_objective": disc_obj, "gen_objective": gen_obj}
        history.append(record)
        if it % 100 == 0:
            log.debug("iteration %d disc %.4f gen %.4f", it, disc_obj, gen_obj)
        if on_iteration:
            on_iteration(it, record)

    return AdversarialRun(generator=generator, discriminator=discriminator, history=history)


def train_da_smote(
    minority,
    cfg: AdversarialConfig,
    neighborhood_k: Optional[int] = None,
    on_iteration: IterationCB = None,
) -> MlpModel:
    X = np.asarray(minority, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise InsufficientMinorityError(X.shape[0] if X.ndim == 2 else 0)
    if cfg.gen_arch[0].input_width != 2 * X.shape[1]:
        raise ConfigError(
            f"DA-SMOTE generator input width {cfg.gen_arch[0].input_width} != 2 x {X.shape[1]}"
        )
    log.info("training DA-SMOTE on %d minority rows for %d iterations", len(X), cfg.iterations)
    return train_adversarial(X, cfg, pair_latent(X, neighborhood_k), on_iteration).generator


def train_gan_baseline(
    minority,
    cfg: AdversarialConfig,
    noise_dim: int,
    on_iteration: IterationCB = None,
) -> MlpModel:
    sampler = noise_latent(noise_dim)
    if cfg.gen_arch[0].input_width != noise_dim:
        raise ConfigError(f"GAN generator input width {cfg.gen_arch[0].input_width} != noise_dim {noise_dim}")
    log.info("training GAN baseline for %d iterations (noise_dim=%d)", cfg.iterations, noise_dim)
    return train_adversarial(minority, cfg, sampler, on_iteration).generator


# ----------------------------
# Over-sampling
# ----------------------------

def _check_generator(X: np.ndarray, generator: MlpModel, deficit_d: int) -> None:
    if X.ndim != 2 or X.shape[1] != generator.output_width:
        raise InputError(
            f"minority width {X.shape[-1] if X.ndim else 0} does not match generator output {generator.output_width}"
        )
    if deficit_d < 0:
        raise InputError(f"deficit_d must be >= 0, got {deficit_d}")


def oversample_da_smote(
    minority,
    generator: MlpModel,
    deficit_d: int,
    rng_seed: int,
    neighborhood_k: Optional[int] = None,
) -> np.ndarray:
    X = np.asarray(minority, dtype=float)
    _check_generator(X, generator, deficit_d)
    if deficit_d == 0:
        return X.copy()
    if X.shape[0] < 2:
        raise InsufficientMinorityError(X.shape[0])
    if generator.input_width != 2 * X.shape[1]:
        raise InputError(f"generator input width {generator.input_width} != 2 x {X.shape[1]}")
    return np.vstack([X, synthesize_from_pairs(generator, X, deficit_d, rng_seed, neighborhood_k)])


def oversample_gan(minority, generator: MlpModel, deficit_d: int, rng_seed: int) -> np.ndarray:
    X = np.asarray(minority, dtype=float)
    _check_generator(X, generator, deficit_d)
    if deficit_d == 0:
        return X.copy()
    noise = noise_latent(generator.input_width)(np.random.default_rng(rng_seed), deficit_d)
    return np.vstack([X, mlp_forward(generator, noise)])
