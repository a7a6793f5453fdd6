"""Deep SMOTE: a regression network from concatenated minority pairs to a
point on the segment between them.

Training builds (x', y') rows from random minority pairs and uniformly drawn
interpolation weights; over-sampling feeds fresh random pairs through the
frozen network and appends its predictions to the minority set.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InputError, InsufficientMinorityError
from .nn_core import EpochCB, MlpModel, TrainConfig, layer_specs, mlp_forward, mlp_init, mse_train
from .pairs import candidate_pairs, concat_pairs, sample_pairs
from .seeding import derive_seed

log = logging.getLogger(__name__)


@dataclass
class PairBatch:
    pairs_u: np.ndarray  # T x 2 minority row indices (s, t)
    x_prime: np.ndarray  # T x 2n
    y_prime: np.ndarray  # T x n
    lambda_draws: np.ndarray  # T

    def __len__(self) -> int:
        return len(self.pairs_u)


@dataclass
class DeepSmoteModel:
    net: MlpModel
    feature_dim_n: int
    neighborhood_k: Optional[int] = None  # pair mode for training and synthesis

    def __post_init__(self) -> None:
        if self.net.input_width != 2 * self.feature_dim_n:
            raise InputError(
                f"regressor input width {self.net.input_width} != 2 x {self.feature_dim_n}"
            )
        if self.net.output_width != self.feature_dim_n:
            raise InputError(
                f"regressor output width {self.net.output_width} != {self.feature_dim_n}"
            )


def _minority_matrix(minority) -> np.ndarray:
    X = np.asarray(minority, dtype=float)
    if X.ndim != 2:
        raise InputError("minority must be a matrix")
    if X.shape[0] < 2:
        raise InsufficientMinorityError(X.shape[0])
    return X


def build_pair_batch(
    minority,
    t_count: int,
    rng_seed: int,
    neighborhood_k: Optional[int] = None,
) -> PairBatch:
    X = _minority_matrix(minority)
    if t_count < 1:
        raise InputError(f"t_count must be >= 1, got {t_count}")
    rng = np.random.default_rng(rng_seed)
    pairs = sample_pairs(candidate_pairs(X, neighborhood_k), t_count, rng)
    lambdas = rng.random(t_count)
    xs = X[pairs[:, 0]]
    xt = X[pairs[:, 1]]
    return PairBatch(
        pairs_u=pairs,
        x_prime=np.hstack([xs, xt]),
        y_prime=xs + lambdas[:, None] * (xt - xs),
        lambda_draws=lambdas,
    )


def regressor_widths(n: int, hidden: Sequence[int]) -> list[int]:
    return [2 * n, *[int(h) for h in hidden], n]


def train_deep_smote(
    minority,
    t_count: int,
    cfg: TrainConfig,
    hidden: Sequence[int],
    rng_seed: int,
    neighborhood_k: Optional[int] = None,
    on_epoch: EpochCB = None,
) -> DeepSmoteModel:
    X = _minority_matrix(minority)
    n = X.shape[1]
    if any(int(h) < 1 for h in hidden):
        raise InputError(f"hidden widths must be positive, got {list(hidden)}")

    batch = build_pair_batch(X, t_count, derive_seed(rng_seed, "pairs"), neighborhood_k)
    net = mlp_init(layer_specs(regressor_widths(n, hidden)), derive_seed(rng_seed, "init"))
    log.info(
        "training Deep SMOTE regressor %s on %d pairs from %d minority rows",
        "->".join(str(w) for w in net.widths), len(batch), len(X),
    )
    net = mse_train(net, batch.x_prime, batch.y_prime, cfg, on_epoch=on_epoch)
    return DeepSmoteModel(net=net, feature_dim_n=n, neighborhood_k=neighborhood_k)


def synthesize_from_pairs(
    net: MlpModel,
    minority: np.ndarray,
    deficit_d: int,
    rng_seed: int,
    neighborhood_k: Optional[int] = None,
) -> np.ndarray:
    """deficit_d network outputs on freshly drawn concatenated pairs.

    `neighborhood_k` must match the pair mode the network was trained with.
    """
    rng = np.random.default_rng(rng_seed)
    pairs = sample_pairs(candidate_pairs(minority, neighborhood_k), deficit_d, rng)
    return mlp_forward(net, concat_pairs(minority, pairs))


def oversample_deep_smote(minority, model: DeepSmoteModel, deficit_d: int, rng_seed: int) -> np.ndarray:
    """Minority rows followed by deficit_d predicted rows."""
    X = np.asarray(minority, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.feature_dim_n:
        raise InputError(
            f"minority width {X.shape[-1] if X.ndim else 0} does not match model width {model.feature_dim_n}"
        )
    if deficit_d < 0:
        raise InputError(f"deficit_d must be >= 0, got {deficit_d}")
    if deficit_d == 0:
        return X.copy()
    X = _minority_matrix(X)
    return np.vstack([X, synthesize_from_pairs(model.net, X, deficit_d, rng_seed, model.neighborhood_k)])
