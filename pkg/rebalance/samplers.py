"""Method registry: fit a sampler once on a training fold, draw from it many times.

`fit_sampler` returns an object whose `sample(deficit, seed)` gives only the
synthetic rows. Classic samplers keep the fold data and do all work at
sample time; model-based methods train once in `fit_sampler` and later
draws reuse the frozen network, varying only the over-sampling seed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Protocol

import numpy as np

from .classic_samplers import SamplerRequest, adasyn, borderline_smote, smote
from .da_smote import (
    AdversarialConfig,
    discriminator_specs,
    generator_specs,
    oversample_da_smote,
    oversample_gan,
    train_da_smote,
    train_gan_baseline,
)
from .deep_smote import DeepSmoteModel, oversample_deep_smote, train_deep_smote
from .errors import ConfigError
from .nn_core import MlpModel, TrainConfig
from .seeding import derive_seed

log = logging.getLogger(__name__)


class FittedSampler(Protocol):
    method: str

    def sample(self, deficit: int, seed: int) -> np.ndarray: ...


@dataclass
class NoSampler:
    n_features: int
    method: str = "none"

    def sample(self, deficit: int, seed: int) -> np.ndarray:
        return np.zeros((0, self.n_features))


@dataclass
class ClassicSampler:
    method: str
    minority: np.ndarray
    majority: np.ndarray
    settings: Dict[str, Any] = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def sample(self, deficit: int, seed: int) -> np.ndarray:
        req = SamplerRequest(
            minority=self.minority,
            majority=self.majority,
            deficit_d=deficit,
            k_neighbors=int(self.settings.get("k_neighbors", 5)),
            rng_seed=seed,
        )
        if self.method == "smote":
            result = smote(req)
        elif self.method == "borderline_smote":
            result = borderline_smote(req, m_neighbors=int(self.settings.get("m_neighbors", 5)))
        else:
            result = adasyn(req)
        self.warnings.extend(result.warnings)
        return result.samples


@dataclass
class DeepSmoteSampler:
    minority: np.ndarray
    model: DeepSmoteModel
    method: str = "deep_smote"

    def sample(self, deficit: int, seed: int) -> np.ndarray:
        return oversample_deep_smote(self.minority, self.model, deficit, seed)[len(self.minority):]


@dataclass
class DaSmoteSampler:
    minority: np.ndarray
    generator: MlpModel
    neighborhood_k: Optional[int] = None
    method: str = "da_smote"

    def sample(self, deficit: int, seed: int) -> np.ndarray:
        rows = oversample_da_smote(self.minority, self.generator, deficit, seed, self.neighborhood_k)
        return rows[len(self.minority):]


@dataclass
class GanSampler:
    minority: np.ndarray
    generator: MlpModel
    method: str = "gan"

    def sample(self, deficit: int, seed: int) -> np.ndarray:
        return oversample_gan(self.minority, self.generator, deficit, seed)[len(self.minority):]


def adversarial_config(settings: Mapping[str, Any], seed: int) -> AdversarialConfig:
    return AdversarialConfig(
        iterations=int(settings["iterations"]),
        gen_arch=generator_specs(settings["gen_arch"]),
        disc_arch=discriminator_specs(settings["disc_arch"]),
        disc_steps_k=int(settings["disc_steps_k"]),
        minibatch_m=int(settings["minibatch_m"]),
        gen_loss_mode=settings["gen_loss_mode"],
        rng_seed=seed,
        gen_learning_rate=float(settings["gen_learning_rate"]),
        disc_learning_rate=float(settings["disc_learning_rate"]),
        optimizer=settings["optimizer"],
        label_smoothing=float(settings.get("label_smoothing", 0.0)),
    )


def fit_sampler(
    method: str,
    minority: np.ndarray,
    majority: np.ndarray,
    settings: Mapping[str, Any],
    seed: int,
) -> FittedSampler:
    minority = np.asarray(minority, dtype=float)
    majority = np.asarray(majority, dtype=float)

    if method == "none":
        return NoSampler(n_features=minority.shape[1])
    if method in ("smote", "borderline_smote", "adasyn"):
        return ClassicSampler(method, minority, majority, dict(settings))

    if method == "deep_smote":
        cfg = TrainConfig(
            epochs=int(settings["epochs"]),
            batch_size=int(settings["batch_size"]),
            learning_rate=float(settings["learning_rate"]),
            optimizer=settings["optimizer"],
            shuffle_seed=derive_seed(seed, "shuffle"),
        )
        model = train_deep_smote(
            minority,
            int(settings["t_count"]),
            cfg,
            settings["hidden"],
            seed,
            neighborhood_k=settings.get("neighborhood_k"),
        )
        return DeepSmoteSampler(minority, model)

    if method == "da_smote":
        neighborhood_k = settings.get("neighborhood_k")
        generator = train_da_smote(minority, adversarial_config(settings, seed), neighborhood_k=neighborhood_k)
        return DaSmoteSampler(minority, generator, neighborhood_k)

    if method == "gan":
        cfg = adversarial_config(settings, seed)
        generator = train_gan_baseline(minority, cfg, noise_dim=cfg.gen_arch[0].input_width)
        return GanSampler(minority, generator)

    raise ConfigError(f"unknown method {method!r}")
