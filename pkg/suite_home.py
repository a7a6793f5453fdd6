# suite_home.py
from __future__ import annotations

import sys
from pathlib import Path
import streamlit as st

# Ensure project root is importable no matter how Streamlit is launched
PROJECT_ROOT = Path(__file__).resolve().parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

st.set_page_config(page_title="Rebalance – Home", layout="wide")

# ----------------------------
# Navigation
# ----------------------------
PAGE_HOME = "home"
PAGE_BENCH = "bench"

if "rb_page" not in st.session_state:
    st.session_state.rb_page = PAGE_HOME


def go(page: str):
    st.session_state.rb_page = page
    st.rerun()


def render_home():
    st.title("Rebalance")
    st.caption(
        "Model-based over-sampling for imbalanced binary data: Deep SMOTE and DA-SMOTE, "
        "benchmarked against SMOTE, Borderline-SMOTE, ADASYN and a plain GAN."
    )

    st.markdown("---")
    st.subheader("Apps")

    st.markdown("### Benchmark")
    st.write("Run a `configs/*.json` grid or a seed-stability study and browse the report.")
    st.caption("C4.5 tree • stratified k-fold • paired t-tests")
    if st.button("Open Benchmark", use_container_width=True):
        go(PAGE_BENCH)

    st.markdown("---")
    st.subheader("Command line")
    st.write("The same runs are available without Streamlit:")
    st.code(
        "python -m rebalance bench --config configs/synthetic_smoke.json\n"
        "python -m rebalance stability --config configs/synthetic_smoke.json --runs 10\n"
        "python -m rebalance validate-data --config configs/pima.json\n"
        "python -m rebalance gradcheck",
        language="text",
    )


def render_bench():
    # Import lazily so the module doesn't run at import time
    from apps import bench_app
    bench_app.main(go_home=lambda: go(PAGE_HOME))


# ----------------------------
# Router
# ----------------------------
page = st.session_state.rb_page

if page == PAGE_HOME:
    render_home()
elif page == PAGE_BENCH:
    render_bench()
else:
    st.session_state.rb_page = PAGE_HOME
    st.rerun()
