"""C4.5-style binary decision tree on continuous features.

Splits are chosen by gain ratio over midpoint thresholds between consecutive
distinct values. Leaves keep class counts and predict a Laplace-smoothed
positive rate, which the AUC computation uses as a score. No pruning.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Union

import numpy as np

from .errors import InputError

# splits that gain less than this many bits are treated as no gain at all
MIN_GAIN = 1e-12


@dataclass(frozen=True)
class TreeParams:
    max_depth: Optional[int] = None
    min_leaf_size: int = 2
    min_gain_ratio: float = 0.0

    def __post_init__(self) -> None:
        if self.min_leaf_size < 1:
            raise InputError(f"min_leaf_size must be >= 1, got {self.min_leaf_size}")
        if self.max_depth is not None and self.max_depth < 1:
            raise InputError(f"max_depth must be >= 1 or None, got {self.max_depth}")
        if self.min_gain_ratio < 0:
            raise InputError(f"min_gain_ratio must be >= 0, got {self.min_gain_ratio}")


@dataclass(frozen=True)
class Leaf:
    pos_count: int
    neg_count: int

    @property
    def proba(self) -> float:
        return (self.pos_count + 1) / (self.pos_count + self.neg_count + 2)


@dataclass(frozen=True)
class Split:
    feature_index: int
    threshold: float  # x[feature_index] <= threshold goes left
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Split, Leaf]


@dataclass(frozen=True)
class SplitCandidate:
    feature_index: int
    threshold: float
    gain: float
    gain_ratio: float


def _entropy(p: np.ndarray) -> np.ndarray:
    """Binary entropy in bits, with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    q = 1.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(q > 0, q * np.log2(q), 0.0))
    return h


def best_split(features: np.ndarray, labels: np.ndarray, params: TreeParams) -> Optional[SplitCandidate]:
    n = len(labels)
    pos_total = int(labels.sum())
    parent = float(_entropy(pos_total / n))
    best: Optional[SplitCandidate] = None

    for j in range(features.shape[1]):
        order = np.argsort(features[:, j], kind="stable")
        xs = features[order, j]
        cum_pos = np.cumsum(labels[order])

        boundary = np.flatnonzero(xs[:-1] < xs[1:])
        n_left = boundary + 1
        keep = (n_left >= params.min_leaf_size) & (n - n_left >= params.min_leaf_size)
        boundary, n_left = boundary[keep], n_left[keep]
        if boundary.size == 0:
            continue
        n_right = n - n_left

        pos_left = cum_pos[boundary]
        pos_right = pos_total - pos_left
        children = (n_left * _entropy(pos_left / n_left) + n_right * _entropy(pos_right / n_right)) / n
        gain = parent - children
        ratio = gain / _entropy(n_left / n)

        i = int(np.argmax(ratio))
        lo, hi = xs[boundary[i]], xs[boundary[i] + 1]
        threshold = (lo + hi) / 2.0
        if not threshold < hi:
            threshold = lo
        if best is None or ratio[i] > best.gain_ratio:
            best = SplitCandidate(j, float(threshold), float(gain[i]), float(ratio[i]))
    return best


def _grow(X: np.ndarray, y: np.ndarray, params: TreeParams, depth: int) -> TreeNode:
    pos = int(y.sum())
    neg = len(y) - pos
    if (
        pos == 0
        or neg == 0
        or (params.max_depth is not None and depth >= params.max_depth)
        or len(y) < 2 * params.min_leaf_size
    ):
        return Leaf(pos, neg)

    cand = best_split(X, y, params)
    if cand is None or cand.gain <= MIN_GAIN or cand.gain_ratio < params.min_gain_ratio:
        return Leaf(pos, neg)

    mask = X[:, cand.feature_index] <= cand.threshold
    return Split(
        cand.feature_index,
        cand.threshold,
        _grow(X[mask], y[mask], params, depth + 1),
        _grow(X[~mask], y[~mask], params, depth + 1),
    )


def train_tree(features, labels, params: TreeParams = TreeParams()) -> TreeNode:
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    if X.ndim != 2 or X.shape[0] == 0:
        raise InputError("train_tree needs a non-empty feature matrix")
    if y.shape != (X.shape[0],):
        raise InputError(f"labels shape {y.shape} does not match {X.shape[0]} rows")
    if not np.all((y == 0) | (y == 1)):
        raise InputError("labels must be 0 or 1")
    return _grow(X, y.astype(int), params, depth=0)


def _leaf_for(tree: TreeNode, x: np.ndarray) -> Leaf:
    node = tree
    while isinstance(node, Split):
        node = node.left if x[node.feature_index] <= node.threshold else node.right
    return node


def predict_proba(tree: TreeNode, x):
    """Laplace-smoothed positive rate of the leaf each row reaches.

    A vector gives a float, a matrix gives one value per row.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        return _leaf_for(tree, arr).proba
    return np.array([_leaf_for(tree, row).proba for row in arr])


def predict_label(tree: TreeNode, x):
    # ties at 0.5 go to the positive class
    proba = predict_proba(tree, x)
    if np.ndim(proba) == 0:
        return int(proba >= 0.5)
    return (proba >= 0.5).astype(int)


def leaves(tree: TreeNode) -> Iterator[Leaf]:
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            yield node
        else:
            stack.append(node.right)
            stack.append(node.left)


def depth(tree: TreeNode) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(depth(tree.left), depth(tree.right))
