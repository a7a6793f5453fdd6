"""Baseline over-samplers: SMOTE, Borderline-SMOTE-1 and ADASYN.

All three interpolate between a base minority row and one of its k nearest
minority neighbours; they differ in which rows serve as bases and how often.
Distances are Euclidean on whatever scale the caller passes (the benchmark
passes min-max normalised features). Distance ties resolve to the lower row
index.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InputError, InsufficientMinorityError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SamplerRequest:
    minority: np.ndarray
    majority: np.ndarray
    deficit_d: int
    k_neighbors: int = 5
    rng_seed: int = 0


@dataclass
class SamplerResult:
    samples: np.ndarray
    bases: np.ndarray  # minority row index of each sample's base
    neighbors: np.ndarray  # minority row index of each sample's partner
    lambdas: np.ndarray
    warnings: List[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.samples)


def nearest_neighbors(points: np.ndarray, queries: np.ndarray, k: int, exclude_self: bool = False) -> np.ndarray:
    """Indices of the k nearest `points` for each query row.

    With `exclude_self`, queries must be `points` itself and row i never
    lists i among its own neighbours.
    """
    dist = cdist(queries, points)
    if exclude_self:
        np.fill_diagonal(dist, np.inf)
    order = np.argsort(dist, axis=1, kind="stable")
    return order[:, :k]


def interpolate(minority: np.ndarray, bases: np.ndarray, neighbors: np.ndarray, lambdas: np.ndarray) -> np.ndarray:
    """base + lambda * (neighbor - base), row by row."""
    a = minority[bases]
    b = minority[neighbors]
    return a + lambdas[:, None] * (b - a)


def _check(req: SamplerRequest) -> tuple[np.ndarray, int, List[str]]:
    X = np.asarray(req.minority, dtype=float)
    if X.ndim != 2:
        raise InputError("minority must be a matrix")
    if req.deficit_d < 0:
        raise InputError(f"deficit_d must be >= 0, got {req.deficit_d}")
    if req.k_neighbors < 1:
        raise InputError(f"k_neighbors must be >= 1, got {req.k_neighbors}")
    w = X.shape[0]
    if w < 2:
        raise InsufficientMinorityError(w)
    warnings: List[str] = []
    k = req.k_neighbors
    if k >= w:
        k = w - 1
        msg = f"k_neighbors={req.k_neighbors} >= minority size {w}; using k={k}"
        log.warning(msg)
        warnings.append(msg)
    return X, k, warnings


def _empty(n_features: int, warnings: List[str]) -> SamplerResult:
    none = np.zeros(0, dtype=int)
    return SamplerResult(np.zeros((0, n_features)), none, none.copy(), np.zeros(0), warnings)


def _from_bases(
    X: np.ndarray,
    bases: np.ndarray,
    k: int,
    rng: np.random.Generator,
    warnings: List[str],
) -> SamplerResult:
    knn = nearest_neighbors(X, X, k, exclude_self=True)
    picks = rng.integers(0, k, size=len(bases))
    neighbors = knn[bases, picks]
    lambdas = rng.random(len(bases))
    return SamplerResult(interpolate(X, bases, neighbors, lambdas), bases, neighbors, lambdas, warnings)


def smote(req: SamplerRequest) -> SamplerResult:
    X, k, warnings = _check(req)
    if req.deficit_d == 0:
        return _empty(X.shape[1], warnings)
    rng = np.random.default_rng(req.rng_seed)
    bases = rng.integers(0, X.shape[0], size=req.deficit_d)
    return _from_bases(X, bases, k, rng, warnings)


# ----------------------------
# Borderline-SMOTE-1
# ----------------------------

def majority_neighbor_counts(minority: np.ndarray, majority: np.ndarray, m: int) -> np.ndarray:
    """For each minority row, how many of its m nearest neighbours in the
    combined set (itself excluded) are majority rows."""
    w = len(minority)
    combined = np.vstack([minority, majority])
    dist = cdist(minority, combined)
    dist[np.arange(w), np.arange(w)] = np.inf
    order = np.argsort(dist, axis=1, kind="stable")[:, :m]
    return (order >= w).sum(axis=1)


def danger_set(minority: np.ndarray, majority: np.ndarray, m: int) -> np.ndarray:
    """Minority rows with m/2 <= (#majority among m neighbours) < m."""
    counts = majority_neighbor_counts(minority, majority, m)
    return np.flatnonzero((2 * counts >= m) & (counts < m))


def borderline_smote(req: SamplerRequest, m_neighbors: int = 5) -> SamplerResult:
    X, k, warnings = _check(req)
    majority = np.asarray(req.majority, dtype=float)
    if majority.ndim != 2 or majority.shape[0] == 0:
        raise InputError("borderline_smote needs a non-empty majority matrix")
    if m_neighbors < 1:
        raise InputError(f"m_neighbors must be >= 1, got {m_neighbors}")
    if req.deficit_d == 0:
        return _empty(X.shape[1], warnings)

    m = min(m_neighbors, X.shape[0] + majority.shape[0] - 1)
    danger = danger_set(X, majority, m)
    if danger.size == 0:
        msg = "empty DANGER set; fell back to plain SMOTE"
        log.warning(msg)
        result = smote(req)
        result.warnings = warnings + [msg]
        return result

    rng = np.random.default_rng(req.rng_seed)
    bases = danger[rng.integers(0, danger.size, size=req.deficit_d)]
    return _from_bases(X, bases, k, rng, warnings)


# ----------------------------
# ADASYN
# ----------------------------

def allocate_counts(weights, total: int) -> np.ndarray:
    """Split `total` proportionally to `weights` by largest remainder.

    Remainder units go to the largest fractional parts; ties go to the lower
    index.
    """
    w = np.asarray(weights, dtype=float)
    if total == 0:
        return np.zeros(len(w), dtype=int)
    quotas = total * w / w.sum()
    counts = np.floor(quotas).astype(int)
    short = total - int(counts.sum())
    if short > 0:
        order = np.argsort(-(quotas - counts), kind="stable")
        counts[order[:short]] += 1
    return counts


def adasyn(req: SamplerRequest) -> SamplerResult:
    X, k, warnings = _check(req)
    majority = np.asarray(req.majority, dtype=float)
    if majority.ndim != 2:
        raise InputError("adasyn needs a majority matrix")
    if req.deficit_d == 0:
        return _empty(X.shape[1], warnings)

    if majority.shape[0] == 0:
        ratios = np.zeros(X.shape[0])
    else:
        k_all = min(req.k_neighbors, X.shape[0] + majority.shape[0] - 1)
        ratios = majority_neighbor_counts(X, majority, k_all) / k_all

    if not np.any(ratios > 0):
        msg = "no majority rows near any minority row; allocating uniformly"
        log.warning(msg)
        warnings.append(msg)
        ratios = np.ones(X.shape[0])

    counts = allocate_counts(ratios, req.deficit_d)
    bases = np.repeat(np.arange(X.shape[0]), counts)
    rng = np.random.default_rng(req.rng_seed)
    return _from_bases(X, bases, k, rng, warnings)
