# apps/bench_app.py
#
# Rebalance benchmark – Streamlit wrapper around rebalance.pipeline
# NOTE: Do NOT call st.set_page_config() in this file; suite_home.py owns it.

from __future__ import annotations

import sys
from pathlib import Path
from typing import Callable

import streamlit as st


def main(go_home: Callable[[], None] | None = None):
    PROJECT_ROOT = Path(__file__).resolve().parents[1]
    if str(PROJECT_ROOT) not in sys.path:
        sys.path.insert(0, str(PROJECT_ROOT))

    top_left, top_right = st.columns([0.8, 0.2])
    with top_left:
        st.title("Over-sampling benchmark")
        st.caption("Deep SMOTE / DA-SMOTE against SMOTE-family and GAN baselines, C4.5 tree, stratified CV.")
    with top_right:
        if go_home is not None:
            if st.button("← Back to Home", use_container_width=True):
                go_home()

    st.markdown("---")

    try:
        from rebalance.config import METHODS, load_run_config
        from rebalance.data_pipeline import load_dataset_ref
        from rebalance.errors import ConfigError, RebalanceError
        from rebalance.pipeline import run_benchmark, stability_report
    except Exception as e:
        st.error(f"Could not import the rebalance package.\n\nError:\n{e}")
        st.stop()

    CONFIG_DIR = PROJECT_ROOT / "configs"

    # --------------------------------------------------
    # Sidebar
    # --------------------------------------------------
    with st.sidebar:
        st.header("Run settings")
        mode = st.radio("Run", ["Benchmark grid", "Stability across seeds"])
        seed = st.number_input("Global seed", min_value=0, value=0, step=1)
        jobs = st.number_input("Workers (-1 = all cores)", min_value=-1, value=1, step=1)
        st.divider()
        st.markdown("### Config folder")
        st.code(str(CONFIG_DIR), language="text")

    # --------------------------------------------------
    # Pick a RunConfig from configs/
    # --------------------------------------------------
    st.header("1) Choose a config")
    configs = sorted(CONFIG_DIR.glob("*.json"))
    if not configs:
        st.warning(f"No `.json` configs found in {CONFIG_DIR}.")
        st.stop()

    config_path = st.selectbox("RunConfig", options=configs, format_func=lambda p: p.name)
    try:
        base = load_run_config(config_path)
    except ConfigError as e:
        st.error(f"Config error: {e}")
        st.stop()

    if base.description:
        st.caption(base.description)
    methods = st.multiselect(
        "Methods",
        options=list(METHODS),
        default=base.methods,
        help="Restricts the grid; the config's own per-method settings still apply.",
    )
    if not methods:
        st.warning("Pick at least one method.")
        st.stop()

    overrides = {"global_seed": int(seed), "methods": methods, "n_jobs": int(jobs)}
    cfg = load_run_config(config_path, overrides=overrides)
    st.write(
        f"**{len(cfg.datasets)}** datasets × **{len(cfg.methods)}** methods × "
        f"**{cfg.repeats}** repeats × **{cfg.k_folds}** folds → output `{cfg.output_dir}`"
    )

    dataset_name = None
    seeds = []
    if mode == "Stability across seeds":
        dataset_name = st.selectbox("Dataset", options=cfg.dataset_names)
        runs = st.number_input("Runs (seeds 0..runs-1)", min_value=2, value=10, step=1)
        seeds = list(range(int(runs)))

    # --------------------------------------------------
    # Run (button-gated)
    # --------------------------------------------------
    st.header("2) Run")
    run_clicked = st.button("Run", type="primary", use_container_width=True)

    progress_bar = st.progress(0)
    status = st.empty()

    def progress_cb(pct: float, msg: str | None = None):
        progress_bar.progress(min(max(int(pct * 100), 0), 100))
        if msg:
            status.write(msg)

    if not run_clicked:
        st.info("Ready when you are: click **Run** to start.")
        return

    with st.spinner("Running…"):
        try:
            if mode == "Benchmark grid":
                report = run_benchmark(cfg, progress_cb=progress_cb)
            else:
                ref = next(r for r in cfg.datasets if r.display_name == dataset_name)
                stab = stability_report(cfg, load_dataset_ref(ref), cfg.methods, seeds, progress_cb=progress_cb)
        except RebalanceError as e:
            st.error("Run failed")
            st.exception(e)
            st.stop()

    progress_bar.progress(100)
    status.success("Run complete")

    st.header("Results")
    if mode == "Benchmark grid":
        rows = report.results
        st.subheader("Mean per dataset and method")
        st.dataframe(
            rows.groupby(["dataset", "method"], sort=False)[["precision", "recall", "f1", "auc"]].mean(),
            use_container_width=True,
        )
        st.subheader("Paired t-tests")
        st.dataframe(
            [{"dataset": t.dataset, "proposed": t.proposed, "baseline": t.baseline, "metric": t.metric,
              "p_value": t.p_value, "significant": t.significant} for t in report.ttests],
            use_container_width=True,
        )
        if report.warnings:
            with st.expander(f"{len(report.warnings)} warnings"):
                for w in report.warnings:
                    st.write(f"- {w}")
        st.subheader("Generated files")
        for k, v in report.files.items():
            st.write(f"**{k}** → {v}")
    else:
        st.subheader(f"Dispersion on {stab.dataset} over {len(stab.seeds)} seeds")
        st.dataframe(stab.dispersion, use_container_width=True)
