"""rebalance: Deep SMOTE / DA-SMOTE over-sampling and a benchmark harness."""

__version__ = "0.1.0"
