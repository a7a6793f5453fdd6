"""Datasets: CSV ingestion, the built-in benchmark registry, min-max scaling
and synthetic generators for self-contained runs.

Label 1 is always the minority (positive) class. Rows with missing cells are
rejected unless the caller asks for them to be dropped; nothing is imputed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from sklearn.datasets import make_circles, make_moons
from sklearn.preprocessing import MinMaxScaler

from .errors import InputError, InsufficientMinorityError, LoadError

log = logging.getLogger(__name__)

MISSING_TOKENS = ("", "?", "NA", "N/A", "NaN", "nan", "null", "NULL", "None")
SYNTHETIC_KINDS = ("two_gaussians", "moons", "ring")


# ----------------------------
# Dataset + registry
# ----------------------------

@dataclass
class Dataset:
    name: str
    features: np.ndarray
    labels: np.ndarray
    feature_names: List[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        X = np.array(self.features, dtype=float)
        y = np.asarray(self.labels)
        if X.ndim != 2 or X.shape[0] == 0:
            raise InputError(f"{self.name}: features must be a non-empty matrix")
        if y.shape != (X.shape[0],):
            raise InputError(f"{self.name}: {y.size} labels for {X.shape[0]} rows")
        if not np.all(np.isfinite(X)):
            raise InputError(f"{self.name}: features contain missing or non-finite values")
        if not np.all((y == 0) | (y == 1)):
            raise InputError(f"{self.name}: labels must be 0 or 1")
        y = y.astype(int)
        if not self.feature_names:
            self.feature_names = [f"x{i}" for i in range(X.shape[1])]
        if len(self.feature_names) != X.shape[1]:
            raise InputError(f"{self.name}: {len(self.feature_names)} names for {X.shape[1]} features")

        if y.sum() > y.size - y.sum():
            log.warning(
                "%s: label 1 is the majority (%d of %d rows); flipping labels so 1 is the minority",
                self.name, int(y.sum()), y.size,
            )
            y = 1 - y

        X.setflags(write=False)
        y.setflags(write=False)
        self.features = X
        self.labels = y

    @property
    def n_pos(self) -> int:
        return int(self.labels.sum())

    @property
    def n_neg(self) -> int:
        return int(self.labels.size - self.labels.sum())

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def deficit(self) -> int:
        """Synthetic rows needed to balance the whole dataset."""
        return self.n_neg - self.n_pos

    def __len__(self) -> int:
        return self.labels.size


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    expected_instances: int
    expected_attributes: int
    expected_pos: int
    expected_neg: int

    def __post_init__(self) -> None:
        if self.expected_pos + self.expected_neg != self.expected_instances:
            raise InputError(f"registry entry {self.name} counts do not add up")

    @property
    def minority_fraction(self) -> float:
        return self.expected_pos / self.expected_instances


REGISTRY: Dict[str, RegistryEntry] = {
    e.name: e
    for e in (
        RegistryEntry("Pima", 768, 8, 268, 500),
        RegistryEntry("WBC", 699, 9, 241, 458),
        RegistryEntry("Haberman", 306, 3, 81, 225),
        RegistryEntry("Ionosphere", 351, 34, 126, 225),
        RegistryEntry("Parkinson", 195, 23, 48, 147),
        RegistryEntry("Blood", 748, 4, 178, 570),
        RegistryEntry("Bankruptcy-1", 7027, 64, 271, 6756),
        RegistryEntry("Bankruptcy-2", 10173, 64, 400, 9773),
        RegistryEntry("Bankruptcy-3", 10503, 64, 495, 10008),
        RegistryEntry("Bankruptcy-5", 5910, 64, 410, 5500),
    )
}


def canonical_name(name: str) -> str:
    """Registry spelling of a dataset name ("bankruptcy y-1" -> "Bankruptcy-1")."""
    key = name.strip().lower().replace("_", "-").replace(" ", "")
    key = key.replace("bankruptcyyear-", "bankruptcy-").replace("bankruptcyy-", "bankruptcy-")
    for canon in REGISTRY:
        if canon.lower() == key:
            return canon
    return name


def lookup_registry(name: str) -> Optional[RegistryEntry]:
    return REGISTRY.get(canonical_name(name))


@dataclass
class ValidationReport:
    dataset: str
    entry: str
    warnings: List[str] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.warnings


def validate_against_registry(ds: Dataset, entry: RegistryEntry) -> ValidationReport:
    """Compare shape and class counts with the registry; mismatches only warn."""
    report = ValidationReport(dataset=ds.name, entry=entry.name)
    checks = (
        ("instances", len(ds), entry.expected_instances),
        ("attributes", ds.n_features, entry.expected_attributes),
        ("positives", ds.n_pos, entry.expected_pos),
        ("negatives", ds.n_neg, entry.expected_neg),
    )
    for what, got, expected in checks:
        if got != expected:
            msg = f"{ds.name}: {what} {got} != registry {entry.name} {expected}"
            log.warning(msg)
            report.warnings.append(msg)
    return report


# ----------------------------
# CSV
# ----------------------------

def _positive_mask(raw: pd.Series, positive_label) -> np.ndarray:
    text = raw.astype(str).str.strip()
    if isinstance(positive_label, (int, float)) and not isinstance(positive_label, bool):
        numeric = pd.to_numeric(text, errors="coerce")
        if numeric.notna().all():
            return (numeric == float(positive_label)).to_numpy()
    return (text == str(positive_label).strip()).to_numpy()


def load_csv(
    path: Union[str, Path],
    label_column: str,
    positive_label,
    name: Optional[str] = None,
    drop_incomplete: bool = False,
    ignore_columns: Sequence[str] = (),
) -> Dataset:
    """Read a comma-separated file with a header row.

    Every column except `label_column` must be numeric. Rows are reported
    1-based, header excluded. With `drop_incomplete`, rows holding a missing
    cell are dropped (with a warning) instead of failing the load.
    `ignore_columns` (row ids and the like) are discarded before parsing.
    """
    path = Path(path)
    if not path.is_file():
        raise LoadError(f"dataset file not found: {path}")
    try:
        frame = pd.read_csv(
            path,
            dtype={label_column: str},
            na_values=list(MISSING_TOKENS),
            keep_default_na=False,
            skipinitialspace=True,
            float_precision="round_trip",
            encoding="utf-8",
        )
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise LoadError(f"cannot parse {path}: {e}") from e

    if label_column not in frame.columns:
        raise LoadError(f"label column not found in {path}", column=label_column)
    for col in ignore_columns:
        if col not in frame.columns:
            raise LoadError(f"ignored column not found in {path}", column=col)
    frame = frame.drop(columns=list(ignore_columns))
    feature_cols = [c for c in frame.columns if c != label_column]
    if not feature_cols:
        raise LoadError(f"{path} has no feature columns")

    missing = frame.isna()
    incomplete = missing.any(axis=1).to_numpy()
    if incomplete.any():
        if not drop_incomplete:
            r = int(np.flatnonzero(incomplete)[0])
            col = str(missing.columns[missing.iloc[r].to_numpy()][0])
            raise LoadError("missing value", row=r + 1, column=col)
        log.warning("%s: dropped %d incomplete rows", path.name, int(incomplete.sum()))

    keep = ~incomplete
    data = frame[keep]
    row_numbers = np.flatnonzero(keep) + 1

    columns = []
    for col in feature_cols:
        values = pd.to_numeric(data[col], errors="coerce")
        bad = ~np.isfinite(values.to_numpy(dtype=float))
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise LoadError(
                f"unparseable value {data[col].iloc[i]!r}", row=int(row_numbers[i]), column=str(col)
            )
        columns.append(values.to_numpy(dtype=float))

    features = np.column_stack(columns) if len(data) else np.zeros((0, len(feature_cols)))
    labels = _positive_mask(data[label_column], positive_label).astype(int)
    log.info("loaded %s: %d rows, %d features, %d positive", path.name, len(labels), len(feature_cols), labels.sum())
    return Dataset(
        name=name or path.stem,
        features=features,
        labels=labels,
        feature_names=[str(c) for c in feature_cols],
    )


def write_csv(ds: Dataset, path: Union[str, Path], label_column: str = "label") -> Path:
    """Write `ds` so that load_csv(path, label_column, 1) reads it back exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(ds.features, columns=ds.feature_names)
    frame[label_column] = ds.labels
    frame.to_csv(path, index=False, float_format="%.17g", encoding="utf-8")
    return path


# ----------------------------
# Scaling
# ----------------------------

def fit_minmax(train_features) -> MinMaxScaler:
    X = np.asarray(train_features, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise InputError("fit_minmax needs at least one training row")
    return MinMaxScaler().fit(X)


def apply_minmax(scaler: MinMaxScaler, features) -> np.ndarray:
    # test rows may land outside [0, 1]; they are not clipped
    return scaler.transform(np.asarray(features, dtype=float))


# ----------------------------
# Synthetic data
# ----------------------------

@dataclass(frozen=True)
class SyntheticSpec:
    kind: str
    n_major: int
    n_minor: int
    overlap: float = 0.0
    seed: int = 0


def make_synthetic(kind: str, n_major: int, n_minor: int, overlap: float = 0.0, seed: int = 0) -> Dataset:
    """Reproducible 2-D imbalanced data; overlap in [0, 1] controls class mixing.

    two_gaussians with overlap 0 is linearly separable on the first feature.
    """
    if kind not in SYNTHETIC_KINDS:
        raise InputError(f"unknown synthetic kind {kind!r}; expected one of {SYNTHETIC_KINDS}")
    if n_minor < 2:
        raise InsufficientMinorityError(n_minor)
    if n_major < 1:
        raise InputError(f"n_major must be >= 1, got {n_major}")
    if not 0.0 <= overlap <= 1.0:
        raise InputError(f"overlap must lie in [0, 1], got {overlap}")

    sk_seed = int(seed) % (2**32)
    if kind == "two_gaussians":
        rng = np.random.default_rng(sk_seed)
        sep = (1.0 - overlap) * 8.0
        major = rng.normal(0.0, 1.0, size=(n_major, 2))
        minor = rng.normal(0.0, 1.0, size=(n_minor, 2))
        minor[:, 0] += sep
        if overlap == 0.0:
            major[:, 0] = np.minimum(major[:, 0], sep / 2 - 0.5)
            minor[:, 0] = np.maximum(minor[:, 0], sep / 2 + 0.5)
        X = np.vstack([major, minor])
        y = np.concatenate([np.zeros(n_major, dtype=int), np.ones(n_minor, dtype=int)])
    elif kind == "moons":
        X, y = make_moons(n_samples=(n_major, n_minor), noise=0.05 + 0.3 * overlap, random_state=sk_seed)
    else:
        X, y = make_circles(
            n_samples=(n_major, n_minor), noise=0.05 + 0.2 * overlap, factor=0.5, random_state=sk_seed
        )

    return Dataset(
        name=f"{kind}-{n_major}x{n_minor}",
        features=X,
        labels=y,
        feature_names=["x0", "x1"],
    )


# ----------------------------
# Config references
# ----------------------------

@dataclass(frozen=True)
class DatasetRef:
    """Where a benchmark dataset comes from: a CSV file or a synthetic spec."""

    name: Optional[str] = None
    path: Optional[Path] = None
    label_column: str = "class"
    positive_label: Union[str, int, float] = 1
    drop_incomplete: bool = False
    ignore_columns: Tuple[str, ...] = ()
    synthetic: Optional[SyntheticSpec] = None

    @property
    def display_name(self) -> str:
        if self.name:
            return self.name
        if self.synthetic is not None:
            s = self.synthetic
            return f"{s.kind}-{s.n_major}x{s.n_minor}"
        return Path(self.path).stem if self.path else "dataset"


def load_dataset_ref(ref: DatasetRef) -> Dataset:
    """Materialise a config reference and check it against the registry."""
    if ref.synthetic is not None:
        s = ref.synthetic
        ds = make_synthetic(s.kind, s.n_major, s.n_minor, s.overlap, s.seed)
        ds.name = ref.display_name
        return ds
    if ref.path is None:
        raise LoadError(f"dataset {ref.display_name} has neither a path nor a synthetic block")

    ds = load_csv(
        ref.path,
        ref.label_column,
        ref.positive_label,
        name=ref.display_name,
        drop_incomplete=ref.drop_incomplete,
        ignore_columns=ref.ignore_columns,
    )
    entry = lookup_registry(ds.name)
    if entry is not None:
        validate_against_registry(ds, entry)
    return ds
