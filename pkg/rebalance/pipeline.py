"""Benchmark orchestration: one fold, the full grid, and the stability study.

Per fold: min-max scaling fitted on the training rows, a sampler fitted on
the training minority and majority, over-sampling to exact balance, a tree
trained on the balanced set and scored on the untouched test rows. The grid
fans folds out with joblib and collects them back in plan order, so results
do not depend on the worker count.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from .config import PROPOSED_METHODS, RunConfig, resolve_method_settings
from .data_pipeline import Dataset, apply_minmax, fit_minmax, load_dataset_ref
from .errors import BenchmarkError, InputError, LeakageError, RebalanceError, StratificationError
from .metrics_eval import (
    METRICS,
    FoldMetrics,
    MetricSummary,
    aggregate,
    dispersion_summary,
    evaluate_fold,
    paired_t_test,
    stratified_kfold,
)
from .report import emit_report
from .samplers import FittedSampler, fit_sampler
from .seeding import derive_seed
from .tree_classifier import TreeParams, predict_proba, train_tree

log = logging.getLogger(__name__)

ProgressCB = Optional[Callable[[float, str], None]]


def _call_progress(cb: ProgressCB, p: float, msg: str) -> None:
    if cb:
        cb(float(p), msg)


# ----------------------------
# One fold
# ----------------------------

@dataclass
class IndexAudit:
    """Original row indices handed to each training stage of a fold.

    Stages record their rows just before consuming them; synthetic rows are
    recorded as -1. With `test_rows` set, a record holding any test row
    raises LeakageError before the stage runs.
    """

    test_rows: Optional[np.ndarray] = None
    where: str = ""
    stages: Dict[str, np.ndarray] = field(default_factory=dict)

    STAGES = ("scaler", "sampler", "tree")

    def record(self, stage: str, rows: np.ndarray) -> None:
        rows = np.asarray(rows, dtype=int)
        self.stages[stage] = rows
        if self.test_rows is not None:
            self._refuse(stage, rows, self.test_rows, self.where)

    def check(self, test_idx: np.ndarray, where: str) -> None:
        for stage in self.STAGES:
            if stage not in self.stages:
                raise LeakageError(f"{where}: no rows recorded for the {stage}")
            self._refuse(stage, self.stages[stage], np.asarray(test_idx), where)

    @staticmethod
    def _refuse(stage: str, rows: np.ndarray, test_idx: np.ndarray, where: str) -> None:
        leaked = np.intersect1d(rows, test_idx)
        if leaked.size:
            raise LeakageError(f"{where}: test rows {leaked[:5].tolist()} reached the {stage}")


@dataclass
class PreparedFold:
    train_X: np.ndarray  # scaled with training statistics
    train_y: np.ndarray
    test_X: np.ndarray
    test_y: np.ndarray
    minority: np.ndarray
    majority: np.ndarray
    train_rows: np.ndarray  # dataset row of each train_X row
    minority_rows: np.ndarray
    majority_rows: np.ndarray
    audit: IndexAudit = field(default_factory=IndexAudit)

    @property
    def deficit(self) -> int:
        return len(self.majority) - len(self.minority)


def prepare_fold(
    ds: Dataset,
    train_idx: np.ndarray,
    test_idx: np.ndarray,
    audit: bool = False,
    where: str = "",
) -> PreparedFold:
    """Scale with training statistics and split the training rows by class.

    With `audit`, every later stage of the fold refuses test rows.
    """
    train_idx = np.asarray(train_idx)
    test_idx = np.asarray(test_idx)
    index_audit = IndexAudit(test_idx if audit else None, where or ds.name)
    index_audit.record("scaler", train_idx)
    scaler = fit_minmax(ds.features[train_idx])
    train_X = apply_minmax(scaler, ds.features[train_idx])
    train_y = ds.labels[train_idx]
    is_pos = train_y == 1
    if is_pos.sum() > (~is_pos).sum():
        raise StratificationError(f"{ds.name}: training fold has more positives than negatives")
    return PreparedFold(
        train_X=train_X,
        train_y=train_y,
        test_X=apply_minmax(scaler, ds.features[test_idx]),
        test_y=ds.labels[test_idx],
        minority=train_X[is_pos],
        majority=train_X[~is_pos],
        train_rows=train_idx,
        minority_rows=train_idx[is_pos],
        majority_rows=train_idx[~is_pos],
        audit=index_audit,
    )


def fit_fold_sampler(prep: PreparedFold, method: str, settings: Dict[str, Any], seed: int) -> FittedSampler:
    prep.audit.record("sampler", np.concatenate([prep.minority_rows, prep.majority_rows]))
    return fit_sampler(method, prep.minority, prep.majority, settings, seed)


def balance_and_score(
    prep: PreparedFold,
    sampler: FittedSampler,
    sample_seed: int,
    tree_params: TreeParams,
    fold: int = 0,
    repeat: int = 0,
) -> Tuple[FoldMetrics, np.ndarray]:
    """Over-sample to exact balance, train the tree, score the test fold."""
    synthetic = sampler.sample(prep.deficit, sample_seed)
    X = np.vstack([prep.train_X, synthetic])
    y = np.concatenate([prep.train_y, np.ones(len(synthetic), dtype=int)])
    if sampler.method != "none":
        n_pos = int(y.sum())
        if n_pos != len(y) - n_pos:
            raise InputError(f"{sampler.method} left {n_pos} positives against {len(y) - n_pos} negatives")
    prep.audit.record("tree", np.concatenate([prep.train_rows, np.full(len(synthetic), -1)]))
    tree = train_tree(X, y, tree_params)
    metrics = evaluate_fold(prep.test_y, predict_proba(tree, prep.test_X), fold, repeat)
    return metrics, synthetic


@dataclass
class FoldOutcome:
    dataset: str
    repeat: int
    fold: int
    method: str
    metrics: FoldMetrics
    train_minority: int
    train_majority: int
    synthetic: int
    warnings: List[str] = field(default_factory=list)

    def row(self) -> Dict[str, Any]:
        return {
            "dataset": self.dataset,
            "repeat": self.repeat,
            "fold": self.fold,
            "method": self.method,
            **self.metrics.values(),
            "train_minority": self.train_minority,
            "train_majority": self.train_majority,
            "synthetic": self.synthetic,
        }


def run_fold(
    ds: Dataset,
    train_idx: np.ndarray,
    test_idx: np.ndarray,
    method: str,
    settings: Dict[str, Any],
    seed: int,
    tree_params: TreeParams = TreeParams(),
    repeat: int = 0,
    fold: int = 0,
    audit: bool = False,
) -> FoldOutcome:
    where = f"{ds.name} repeat={repeat} fold={fold} method={method}"
    try:
        prep = prepare_fold(ds, train_idx, test_idx, audit, where)
        sampler = fit_fold_sampler(prep, method, settings, seed)
        metrics, synthetic = balance_and_score(
            prep, sampler, derive_seed(seed, "oversample"), tree_params, fold, repeat
        )
    except Exception as e:
        raise BenchmarkError(ds.name, repeat, fold, method, e) from e
    return FoldOutcome(
        dataset=ds.name,
        repeat=repeat,
        fold=fold,
        method=method,
        metrics=metrics,
        train_minority=len(prep.minority),
        train_majority=len(prep.majority),
        synthetic=len(synthetic),
        warnings=list(getattr(sampler, "warnings", [])),
    )


# ----------------------------
# Full benchmark
# ----------------------------

@dataclass(frozen=True)
class TTestRecord:
    dataset: str
    proposed: str
    baseline: str
    metric: str
    t_stat: float
    p_value: float
    mean_difference: float
    significant: bool  # p < alpha and the proposed method is ahead


@dataclass
class BenchmarkReport:
    config: RunConfig
    outcomes: List[FoldOutcome]
    summary: Dict[Tuple[str, str, str], MetricSummary]
    ttests: List[TTestRecord]
    wins: Dict[str, Dict[str, Any]]
    warnings: List[str] = field(default_factory=list)
    files: Dict[str, Path] = field(default_factory=dict)

    @property
    def results(self) -> pd.DataFrame:
        return pd.DataFrame([o.row() for o in self.outcomes])


@dataclass(frozen=True)
class _Job:
    ds_index: int
    repeat: int
    fold: int
    method: str
    train_idx: np.ndarray
    test_idx: np.ndarray
    settings: Dict[str, Any]
    seed: int


def _plan(cfg: RunConfig, datasets: Sequence[Dataset]) -> List[_Job]:
    jobs: List[_Job] = []
    for di, ds in enumerate(datasets):
        settings = {m: resolve_method_settings(cfg, m, ds.name, ds.n_features) for m in cfg.methods}
        for r in range(cfg.repeats):
            log.info("dataset %s: preparing repeat %d", ds.name, r)
            splits = stratified_kfold(ds.labels, cfg.k_folds, derive_seed(cfg.global_seed, ds.name, r))
            for f, (train_idx, test_idx) in enumerate(splits):
                for m in cfg.methods:
                    seed = derive_seed(cfg.global_seed, ds.name, r, f, m)
                    jobs.append(_Job(di, r, f, m, train_idx, test_idx, settings[m], seed))
    return jobs


def compare_methods(
    outcomes: Sequence[FoldOutcome],
    methods: Sequence[str],
    alpha: float = 0.05,
) -> List[TTestRecord]:
    """Paired t-tests of each proposed method against every other method.

    Pairs are (repeat, fold) cells of one dataset, so both sides saw identical
    splits.
    """
    frame = pd.DataFrame([o.row() for o in outcomes])
    records: List[TTestRecord] = []
    for dataset, part in frame.groupby("dataset", sort=False):
        for proposed in (m for m in PROPOSED_METHODS if m in methods):
            for baseline in (m for m in methods if m != proposed):
                a = part[part.method == proposed].sort_values(["repeat", "fold"])
                b = part[part.method == baseline].sort_values(["repeat", "fold"])
                for metric in METRICS:
                    res = paired_t_test(a[metric].to_numpy(), b[metric].to_numpy(), alpha)
                    records.append(TTestRecord(
                        dataset=str(dataset),
                        proposed=proposed,
                        baseline=baseline,
                        metric=metric,
                        t_stat=res.t_stat,
                        p_value=res.p_value,
                        mean_difference=res.mean_difference,
                        significant=bool(res.significant and res.mean_difference > 0),
                    ))
    return records


def win_summary(
    summary: Dict[Tuple[str, str, str], MetricSummary],
    ttests: Sequence[TTestRecord],
    datasets: Sequence[str],
    methods: Sequence[str],
) -> Dict[str, Dict[str, Any]]:
    """Per proposed method and metric: datasets where it has the best mean,
    and how many baseline comparisons it wins significantly."""
    wins: Dict[str, Dict[str, Any]] = {}
    for proposed in (m for m in PROPOSED_METHODS if m in methods):
        per_metric: Dict[str, Any] = {}
        for metric in METRICS:
            best = [
                d for d in datasets
                if summary[(d, proposed, metric)].mean >= max(summary[(d, m, metric)].mean for m in methods)
            ]
            significant = sum(1 for t in ttests if t.proposed == proposed and t.metric == metric and t.significant)
            per_metric[metric] = {"best_on": best, "significant_wins": significant}
        wins[proposed] = per_metric
    return wins


def run_benchmark(cfg: RunConfig, progress_cb: ProgressCB = None, write: bool = True) -> BenchmarkReport:
    _call_progress(progress_cb, 0.0, "Loading datasets…")
    datasets = [load_dataset_ref(ref) for ref in cfg.datasets]
    for ds in datasets:
        log.info("dataset %s: %d rows, %d features, %d positive", ds.name, len(ds), ds.n_features, ds.n_pos)

    jobs = _plan(cfg, datasets)
    log.info("running %d fold jobs on %d workers", len(jobs), cfg.n_jobs)
    outcomes: Dict[Tuple[int, int, int, str], FoldOutcome] = {}
    parallel = Parallel(n_jobs=cfg.n_jobs, return_as="generator")
    stream = parallel(
        delayed(run_fold)(
            datasets[j.ds_index], j.train_idx, j.test_idx, j.method, j.settings, j.seed,
            cfg.tree, j.repeat, j.fold, cfg.audit,
        )
        for j in jobs
    )
    for n_done, (job, outcome) in enumerate(zip(jobs, stream), start=1):
        outcomes[(job.ds_index, job.repeat, job.fold, job.method)] = outcome
        _call_progress(
            progress_cb, 0.95 * n_done / len(jobs),
            f"{outcome.dataset} repeat {job.repeat} fold {job.fold}: {job.method}",
        )

    expected = {(di, r, f, m) for di in range(len(datasets)) for r in range(cfg.repeats)
                for f in range(cfg.k_folds) for m in cfg.methods}
    if set(outcomes) != expected:
        raise RebalanceError(f"report incomplete: {len(expected - set(outcomes))} cells missing")

    order = {m: i for i, m in enumerate(cfg.methods)}
    ordered = [outcomes[k] for k in sorted(outcomes, key=lambda k: (k[0], k[1], k[2], order[k[3]]))]

    names = [ds.name for ds in datasets]
    summary: Dict[Tuple[str, str, str], MetricSummary] = {}
    for name in names:
        for m in cfg.methods:
            agg = aggregate([o.metrics for o in ordered if o.dataset == name and o.method == m])
            for metric, value in agg.items():
                summary[(name, m, metric)] = value

    ttests = compare_methods(ordered, cfg.methods, cfg.alpha)
    warnings = sorted({w for o in ordered for w in o.warnings})
    report = BenchmarkReport(
        config=cfg,
        outcomes=ordered,
        summary=summary,
        ttests=ttests,
        wins=win_summary(summary, ttests, names, cfg.methods),
        warnings=warnings,
    )
    if write:
        _call_progress(progress_cb, 0.97, "Writing report…")
        report.files = emit_report(report, cfg.output_dir)
        log.info("report written to %s", cfg.output_dir)
    _call_progress(progress_cb, 1.0, "Done.")
    return report


# ----------------------------
# Stability
# ----------------------------

@dataclass
class StabilityReport:
    dataset: str
    seeds: List[int]
    per_run: Dict[str, List[Dict[str, float]]]  # method -> fold-averaged metrics per run
    digests: Dict[str, List[str]]  # method -> sha256 of the synthesized rows per run
    dispersion: pd.DataFrame


def stability_report(
    cfg: RunConfig,
    ds: Dataset,
    methods: Sequence[str],
    seeds: Sequence[int],
    runs: Optional[int] = None,
    progress_cb: ProgressCB = None,
) -> StabilityReport:
    """Repeat the CV protocol once per over-sampling seed on fixed folds.

    Each (fold, method) sampler is fitted once; model-based methods therefore
    reuse one frozen network across runs and only the over-sampling seed
    changes.
    """
    seeds = [int(s) for s in seeds]
    runs = len(seeds) if runs is None else runs
    if runs != len(seeds) or runs < 2:
        raise InputError(f"stability needs runs == len(seeds) >= 2, got runs={runs}, {len(seeds)} seeds")

    splits = stratified_kfold(ds.labels, cfg.k_folds, derive_seed(cfg.global_seed, ds.name, "stability"))
    per_fold: Dict[str, List[List[FoldMetrics]]] = {m: [[] for _ in seeds] for m in methods}
    hashes: Dict[str, List[Any]] = {m: [hashlib.sha256() for _ in seeds] for m in methods}

    total = len(splits) * len(methods)
    for f, (train_idx, test_idx) in enumerate(splits):
        prep = prepare_fold(ds, train_idx, test_idx)
        for mi, m in enumerate(methods):
            settings = resolve_method_settings(cfg, m, ds.name, ds.n_features)
            sampler = fit_fold_sampler(
                prep, m, settings, derive_seed(cfg.global_seed, ds.name, "stability", f, m)
            )
            for ri, s in enumerate(seeds):
                metrics, synthetic = balance_and_score(prep, sampler, derive_seed(s, f), cfg.tree, f, ri)
                per_fold[m][ri].append(metrics)
                hashes[m][ri].update(np.ascontiguousarray(synthetic).tobytes())
            _call_progress(progress_cb, (f * len(methods) + mi + 1) / total, f"fold {f}: {m}")

    per_run = {
        m: [{name: s.mean for name, s in aggregate(run).items()} for run in per_fold[m]]
        for m in methods
    }
    digests = {m: [h.hexdigest() for h in hashes[m]] for m in methods}
    log.info("stability on %s: %d runs x %d methods", ds.name, runs, len(methods))
    return StabilityReport(
        dataset=ds.name,
        seeds=seeds,
        per_run=per_run,
        digests=digests,
        dispersion=dispersion_summary(per_run),
    )
