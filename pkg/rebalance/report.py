"""Report files of a benchmark run.

    results.csv     one row per (dataset, repeat, fold, method)
    summary.json    means, stds, t-tests, win summary (stable key order)
    summary.md      std grid per dataset and method, means with significance marks
    plot_data.csv   one row per (dataset, method, metric) for bar charts
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Union

import pandas as pd

from .metrics_eval import METRICS

if TYPE_CHECKING:
    from .pipeline import BenchmarkReport

# summary.md marks a baseline cell when a proposed method significantly beats it
MARKS = {"deep_smote": "*", "da_smote": "+"}
STD_METRICS = ("f1", "auc")


def _number(value: Optional[float]) -> Union[float, str, None]:
    if value is None:
        return None
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return float(value)


def _fmt(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def _beaten_by(report: "BenchmarkReport", dataset: str, method: str, metric: str) -> List[str]:
    return [
        t.proposed for t in report.ttests
        if t.dataset == dataset and t.baseline == method and t.metric == metric and t.significant
    ]


def _md_table(header: List[str], rows: List[List[str]]) -> List[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return lines


def summary_dict(report: "BenchmarkReport") -> Dict[str, Any]:
    cfg = report.config
    datasets = list(dict.fromkeys(o.dataset for o in report.outcomes))
    summary: Dict[str, Any] = {}
    for d in datasets:
        summary[d] = {
            m: {
                metric: {
                    "mean": _number(report.summary[(d, m, metric)].mean),
                    "std": _number(report.summary[(d, m, metric)].std),
                }
                for metric in METRICS
            }
            for m in cfg.methods
        }
    return {
        "config": cfg.to_dict(),
        "rows": len(report.outcomes),
        "summary": summary,
        "ttests": [
            {
                "dataset": t.dataset,
                "proposed": t.proposed,
                "baseline": t.baseline,
                "metric": t.metric,
                "t_stat": _number(t.t_stat),
                "p_value": _number(t.p_value),
                "mean_difference": _number(t.mean_difference),
                "significant": t.significant,
            }
            for t in report.ttests
        ],
        "wins": report.wins,
        "warnings": list(report.warnings),
    }


def summary_markdown(report: "BenchmarkReport") -> str:
    cfg = report.config
    datasets = list(dict.fromkeys(o.dataset for o in report.outcomes))
    lines = [
        "# Benchmark summary",
        "",
        f"{len(datasets)} datasets, methods {', '.join(cfg.methods)}, "
        f"{cfg.repeats} x {cfg.k_folds}-fold CV, seed {cfg.global_seed}.",
        "",
    ]

    for metric in STD_METRICS:
        lines += [f"## Standard deviation: {metric.upper()}", ""]
        rows = [[d] + [_fmt(report.summary[(d, m, metric)].std) for m in cfg.methods] for d in datasets]
        lines += _md_table(["dataset"] + list(cfg.methods), rows) + [""]

    legend = ", ".join(f"`{mark}` {name} significantly better" for name, mark in MARKS.items() if name in cfg.methods)
    for metric in METRICS:
        lines += [f"## Mean {metric}", ""]
        rows = []
        for d in datasets:
            row = [d]
            for m in cfg.methods:
                marks = "".join(MARKS[p] for p in _beaten_by(report, d, m, metric))
                row.append(_fmt(report.summary[(d, m, metric)].mean) + marks)
            rows.append(row)
        lines += _md_table(["dataset"] + list(cfg.methods), rows) + [""]
        if legend:
            lines += [f"Marks (paired t-test, alpha {cfg.alpha}): {legend}.", ""]

    if report.wins:
        lines += ["## Wins", ""]
        rows = []
        for proposed, per_metric in report.wins.items():
            for metric in METRICS:
                w = per_metric[metric]
                rows.append([proposed, metric, ", ".join(w["best_on"]) or "-", str(w["significant_wins"])])
        lines += _md_table(["method", "metric", "best mean on", "significant wins"], rows) + [""]

    if report.warnings:
        lines += ["## Warnings", ""] + [f"- {w}" for w in report.warnings] + [""]
    return "\n".join(lines)


def plot_frame(report: "BenchmarkReport") -> pd.DataFrame:
    cfg = report.config
    datasets = list(dict.fromkeys(o.dataset for o in report.outcomes))
    rows = []
    for d in datasets:
        for m in cfg.methods:
            for metric in METRICS:
                s = report.summary[(d, m, metric)]
                beaten = _beaten_by(report, d, m, metric)
                rows.append({
                    "dataset": d,
                    "method": m,
                    "metric": metric,
                    "mean": s.mean,
                    "std": s.std,
                    "beaten_by_deep_smote": "deep_smote" in beaten,
                    "beaten_by_da_smote": "da_smote" in beaten,
                })
    return pd.DataFrame(rows)


def emit_report(report: "BenchmarkReport", out_dir: Union[str, Path]) -> Dict[str, Path]:
    if not report.outcomes:
        raise ValueError("emit_report needs at least one fold result")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    paths = {
        "results": out_dir / "results.csv",
        "summary_json": out_dir / "summary.json",
        "summary_md": out_dir / "summary.md",
        "plot_data": out_dir / "plot_data.csv",
    }
    report.results.to_csv(paths["results"], index=False, float_format="%.17g", lineterminator="\n")
    paths["summary_json"].write_text(
        json.dumps(summary_dict(report), indent=2, sort_keys=True, allow_nan=False) + "\n",
        encoding="utf-8",
    )
    paths["summary_md"].write_text(summary_markdown(report), encoding="utf-8")
    plot_frame(report).to_csv(paths["plot_data"], index=False, float_format="%.17g", lineterminator="\n")
    return paths
