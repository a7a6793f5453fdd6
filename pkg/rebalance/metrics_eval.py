"""Fold metrics, stratified cross-validation and paired significance tests."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import betainc
from scipy.stats import rankdata
from sklearn.model_selection import StratifiedKFold

from .errors import InputError, StratificationError, UndefinedMetricError

METRICS = ("precision", "recall", "f1", "auc")

Split = Tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fn: int
    fp: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn


@dataclass(frozen=True)
class FoldMetrics:
    precision: float
    recall: float
    f1: float
    auc: float
    fold_index: int = 0
    repeat_index: int = 0

    def __post_init__(self) -> None:
        for name in METRICS:
            if not math.isfinite(getattr(self, name)):
                raise InputError(f"{name} is not finite")

    def values(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in METRICS}


@dataclass(frozen=True)
class TTestResult:
    t_stat: float
    p_value: float
    significant: bool
    mean_difference: float


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    std: Optional[float]  # None for a single observation


def _binary(name: str, values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1 or arr.size == 0:
        raise InputError(f"{name} must be a non-empty vector")
    if not np.all((arr == 0) | (arr == 1)):
        raise InputError(f"{name} must contain only 0 and 1")
    return arr.astype(int)


def confusion(y_true, y_pred) -> ConfusionCounts:
    t = _binary("y_true", y_true)
    p = _binary("y_pred", y_pred)
    if t.shape != p.shape:
        raise InputError(f"y_true has {t.size} entries but y_pred has {p.size}")
    return ConfusionCounts(
        tp=int(np.sum((t == 1) & (p == 1))),
        fn=int(np.sum((t == 1) & (p == 0))),
        fp=int(np.sum((t == 0) & (p == 1))),
        tn=int(np.sum((t == 0) & (p == 0))),
    )


def precision_recall_f1(c: ConfusionCounts) -> Tuple[float, float, float]:
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    if precision + recall == 0:
        return precision, recall, 0.0
    return precision, recall, 2 * recall * precision / (recall + precision)


def auc(y_true, scores) -> float:
    """Rank (Mann-Whitney) AUC; tied positive/negative pairs count one half."""
    t = _binary("y_true", y_true)
    s = np.asarray(scores, dtype=float)
    if s.shape != t.shape:
        raise InputError(f"y_true has {t.size} entries but scores has {s.size}")
    n_pos = int(t.sum())
    n_neg = t.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC needs at least one positive and one negative")
    ranks = rankdata(s)  # average ranks give ties half credit
    u = ranks[t == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def evaluate_fold(y_true, scores, fold_index: int = 0, repeat_index: int = 0) -> FoldMetrics:
    """Metrics of one test fold; labels are predicted positive when score >= 0.5."""
    t = _binary("y_true", y_true)
    if t.min() == t.max():
        raise StratificationError(
            f"test fold {fold_index} of repeat {repeat_index} holds a single class"
        )
    s = np.asarray(scores, dtype=float)
    precision, recall, f1 = precision_recall_f1(confusion(t, (s >= 0.5).astype(int)))
    return FoldMetrics(precision, recall, f1, auc(t, s), fold_index, repeat_index)


def stratified_kfold(labels, k: int, seed: int) -> List[Split]:
    """k shuffled stratified (train, test) index splits of `labels`."""
    y = _binary("labels", labels)
    if k < 2:
        raise StratificationError(f"k must be >= 2, got {k}")
    counts = np.bincount(y, minlength=2)
    if counts.min() < k:
        raise StratificationError(
            f"class sizes {counts.tolist()} are too small for {k} folds"
        )
    skf = StratifiedKFold(n_splits=k, shuffle=True, random_state=int(seed) % (2**32))
    return [(train, test) for train, test in skf.split(np.zeros((y.size, 1)), y)]


def t_cdf(t: float, df: float) -> float:
    """Student-t CDF through the regularized incomplete beta function."""
    if df <= 0:
        raise InputError(f"df must be positive, got {df}")
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    tail = 0.5 * float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return 1.0 - tail if t >= 0 else tail


def paired_t_test(a, b, alpha: float = 0.05) -> TTestResult:
    """Two-tailed paired t-test of a against b.

    Differences with zero variance have no t distribution: a nonzero mean is
    reported significant with p = 0, a zero mean not significant with t = 0.
    """
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InputError(f"paired samples must be vectors of equal length, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise InputError(f"paired t-test needs at least 2 pairs, got {x.size}")

    d = x - y
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(0.0, 1.0, False, 0.0)
        return TTestResult(math.copysign(math.inf, mean), 0.0, True, mean)

    df = d.size - 1
    t = mean / (sd / math.sqrt(d.size))
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return TTestResult(float(t), p, p < alpha, mean)


def aggregate(metrics: Sequence[FoldMetrics]) -> Dict[str, MetricSummary]:
    """Mean and sample (n-1) standard deviation of every metric."""
    if not metrics:
        raise InputError("aggregate needs at least one FoldMetrics")
    frame = pd.DataFrame([m.values() for m in metrics], columns=list(METRICS))
    means = frame.mean()
    stds = frame.std(ddof=1)
    return {
        name: MetricSummary(
            mean=float(means[name]),
            std=None if len(frame) < 2 else float(stds[name]),
        )
        for name in METRICS
    }


def dispersion_summary(per_run: Mapping[str, Iterable[Mapping[str, float]]]) -> pd.DataFrame:
    """Std of each metric across runs, one row per method.

    `per_run` maps a method name to one metric dict per run.
    """
    rows = []
    for method, runs in per_run.items():
        frame = pd.DataFrame(list(runs), columns=list(METRICS))
        row = {"method": method, "runs": len(frame)}
        for name in METRICS:
            row[f"{name}_mean"] = float(frame[name].mean())
            row[f"{name}_std"] = float(frame[name].std(ddof=1)) if len(frame) > 1 else float("nan")
        rows.append(row)
    return pd.DataFrame(rows).sort_values("method", kind="stable").reset_index(drop=True)
