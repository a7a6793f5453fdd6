"""Minority pair sampling shared by Deep SMOTE and DA-SMOTE.

A pair is an unordered choice of two distinct minority rows; the network
sees it as the concatenation of the two rows in a random order.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .classic_samplers import nearest_neighbors
from .errors import InputError, InsufficientMinorityError


def latent_capacity(w: int) -> int:
    """Number of distinct unordered pairs among w rows, C(w, 2)."""
    if w < 2:
        raise InputError(f"pair capacity needs w >= 2, got {w}")
    return w * (w - 1) // 2


def candidate_pairs(minority: np.ndarray, neighborhood_k: Optional[int] = None) -> np.ndarray:
    """All unordered pairs (i < j), or only k-NN graph edges when
    `neighborhood_k` is set."""
    w = len(minority)
    if w < 2:
        raise InsufficientMinorityError(w)
    if neighborhood_k is None:
        s, t = np.triu_indices(w, k=1)
        return np.column_stack([s, t])

    k = max(1, min(int(neighborhood_k), w - 1))
    knn = nearest_neighbors(minority, minority, k, exclude_self=True)
    rows = np.repeat(np.arange(w), k)
    cols = knn.ravel()
    edges = np.column_stack([np.minimum(rows, cols), np.maximum(rows, cols)])
    return np.unique(edges, axis=0)


def sample_pairs(candidates: np.ndarray, t_count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw t_count ordered pairs from the candidate set.

    Up to the candidate count, pairs are distinct. Beyond it, every candidate
    is used once and the remainder is drawn uniformly with replacement.
    Concatenation order is randomised per pair.
    """
    cap = len(candidates)
    if t_count <= cap:
        chosen = rng.choice(cap, size=t_count, replace=False)
    else:
        extra = rng.integers(0, cap, size=t_count - cap)
        chosen = np.concatenate([rng.permutation(cap), extra])
    pairs = candidates[chosen].copy()
    flip = rng.random(t_count) < 0.5
    pairs[flip] = pairs[flip][:, ::-1]
    return pairs


def concat_pairs(minority: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    return np.hstack([minority[pairs[:, 0]], minority[pairs[:, 1]]])
