"""RunConfig: the JSON benchmark description and per-dataset method settings.

Precedence, highest first: CLI overrides, environment (REBALANCE_THREADS
for n_jobs), the config file, built-in defaults. Architectures for the
registry datasets default to the published per-dataset tables.
"""

from __future__ import annotations

import copy
import json
import logging
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from .data_pipeline import DatasetRef, SyntheticSpec, canonical_name
from .errors import ConfigError
from .tree_classifier import TreeParams

log = logging.getLogger(__name__)

METHODS = ("none", "smote", "borderline_smote", "adasyn", "gan", "deep_smote", "da_smote")
PROPOSED_METHODS = ("deep_smote", "da_smote")
THREADS_ENV = "REBALANCE_THREADS"

SCHEMA_PATH = Path(__file__).resolve().parent / "schemas" / "run_config.schema.json"

# Deep SMOTE: hidden widths and training-pair count per dataset
DEEP_SMOTE_TABLE: Dict[str, Tuple[Tuple[int, ...], int]] = {
    "WBC": ((48, 32, 16), 12000),
    "Pima": ((32, 24, 16), 7000),
    "Haberman": ((3,), 1500),
    "Ionosphere": ((138, 96, 72, 38), 7000),
    "Parkinson": ((40, 36, 32, 28), 1500),
    "Blood": ((16, 6), 7000),
    "Bankruptcy-1": ((112, 86, 72), 2000),
    "Bankruptcy-2": ((112, 86, 72), 8000),
    "Bankruptcy-3": ((112, 86, 72), 10000),
    "Bankruptcy-5": ((112, 86, 72), 2000),
}

_BANKRUPTCY_DA = ((128, 512, 256, 128, 100, 82, 64), (64, 48, 24, 16, 8, 1))
_BANKRUPTCY_GAN = ((64, 16, 8, 64), (64, 32, 16, 8, 1))

# DA-SMOTE: (generator widths, discriminator widths)
DA_SMOTE_TABLE: Dict[str, Tuple[Tuple[int, ...], Tuple[int, ...]]] = {
    "WBC": ((18, 64, 48, 24, 12, 9), (9, 4, 2, 1)),
    "Pima": ((16, 64, 48, 24, 12, 8), (8, 4, 2, 1)),
    "Haberman": ((6, 64, 48, 24, 6, 3), (3, 12, 8, 6, 2, 1)),
    "Ionosphere": ((68, 136, 112, 86, 64, 52, 34), (34, 16, 8, 1)),
    "Parkinson": ((44, 112, 96, 82, 64, 32, 22), (22, 16, 8, 1)),
    "Blood": ((8, 32, 24, 16, 12, 8, 4), (4, 3, 2, 1)),
    "Bankruptcy-1": _BANKRUPTCY_DA,
    "Bankruptcy-2": _BANKRUPTCY_DA,
    "Bankruptcy-3": _BANKRUPTCY_DA,
    "Bankruptcy-5": _BANKRUPTCY_DA,
}

# GAN baseline: generator input width is the noise dimension
GAN_TABLE: Dict[str, Tuple[Tuple[int, ...], Tuple[int, ...]]] = {
    "WBC": ((9, 36, 18, 9), (9, 20, 8, 1)),
    "Pima": ((8, 24, 16, 8), (8, 6, 4, 1)),
    "Haberman": ((3, 9, 6, 3), (3, 10, 8, 1)),
    "Ionosphere": ((34, 106, 53, 34), (34, 64, 32, 16, 8, 1)),
    "Parkinson": ((22, 88, 44, 22), (22, 44, 22, 11, 1)),
    "Blood": ((4, 16, 8, 4), (4, 16, 8, 1)),
    "Bankruptcy-1": _BANKRUPTCY_GAN,
    "Bankruptcy-2": _BANKRUPTCY_GAN,
    "Bankruptcy-3": _BANKRUPTCY_GAN,
    "Bankruptcy-5": _BANKRUPTCY_GAN,
}

BASE_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "none": {},
    "smote": {"k_neighbors": 5},
    "borderline_smote": {"k_neighbors": 5, "m_neighbors": 5},
    "adasyn": {"k_neighbors": 5},
    "deep_smote": {
        "hidden": [32, 16],
        "t_count": 2000,
        "epochs": 100,
        "batch_size": 32,
        "learning_rate": 1e-3,
        "optimizer": "adam",
        "neighborhood_k": None,
    },
    "da_smote": {
        "iterations": 1000,
        "disc_steps_k": 1,
        "minibatch_m": 32,
        "gen_loss_mode": "non_saturating",
        "gen_learning_rate": 2e-4,
        "disc_learning_rate": 2e-4,
        "optimizer": "adam",
        "label_smoothing": 0.0,
        "neighborhood_k": None,
    },
    "gan": {
        "iterations": 1000,
        "disc_steps_k": 1,
        "minibatch_m": 32,
        "gen_loss_mode": "non_saturating",
        "gen_learning_rate": 2e-4,
        "disc_learning_rate": 2e-4,
        "optimizer": "adam",
        "label_smoothing": 0.0,
    },
}


def default_arch(method: str, n: int) -> Tuple[List[int], List[int]]:
    """Small architecture used when no table entry fits an n-feature dataset."""
    disc = [n, max(2, 2 * n), 1]
    if method == "da_smote":
        return [2 * n, max(8, 4 * n), max(4, 2 * n), n], disc
    return [n, max(8, 4 * n), n], disc


def _arch_fits(method: str, gen: List[int], disc: List[int], n: int) -> bool:
    gen_in = 2 * n if method == "da_smote" else gen[0]
    return gen[0] == gen_in and gen[-1] == n and disc[0] == n and disc[-1] == 1


# ----------------------------
# RunConfig
# ----------------------------

@dataclass
class RunConfig:
    datasets: List[DatasetRef]
    methods: List[str]
    k_folds: int = 10
    repeats: int = 3
    global_seed: int = 0
    method_params: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    output_dir: Path = Path("results")
    n_jobs: int = 1
    audit: bool = False
    alpha: float = 0.05
    tree: TreeParams = field(default_factory=TreeParams)
    description: str = ""

    def __post_init__(self) -> None:
        if not self.datasets:
            raise ConfigError("at least one dataset is required")
        if not self.methods:
            raise ConfigError("at least one method is required")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ConfigError(f"unknown methods {unknown}; expected a subset of {list(METHODS)}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError(f"duplicate methods in {self.methods}")
        if self.k_folds < 2:
            raise ConfigError(f"k_folds must be >= 2, got {self.k_folds}")
        if self.repeats < 1:
            raise ConfigError(f"repeats must be >= 1, got {self.repeats}")
        if self.n_jobs == 0 or self.n_jobs < -1:
            raise ConfigError(f"n_jobs must be -1 or >= 1, got {self.n_jobs}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        names = [d.display_name for d in self.datasets]
        if len(set(names)) != len(names):
            raise ConfigError(f"dataset names must be unique, got {names}")

    @property
    def dataset_names(self) -> List[str]:
        return [d.display_name for d in self.datasets]

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready echo of the resolved config (paths as strings)."""
        datasets = []
        for d in self.datasets:
            if d.synthetic is not None:
                s = d.synthetic
                datasets.append({
                    "name": d.display_name,
                    "synthetic": {"kind": s.kind, "n_major": s.n_major, "n_minor": s.n_minor,
                                  "overlap": s.overlap, "seed": s.seed},
                })
            else:
                datasets.append({
                    "name": d.display_name,
                    "path": str(d.path),
                    "label_column": d.label_column,
                    "positive_label": d.positive_label,
                    "drop_incomplete": d.drop_incomplete,
                    "ignore_columns": list(d.ignore_columns),
                })
        return {
            "datasets": datasets,
            "methods": list(self.methods),
            "k_folds": self.k_folds,
            "repeats": self.repeats,
            "global_seed": self.global_seed,
            "method_params": copy.deepcopy(self.method_params),
            "n_jobs": self.n_jobs,
            "audit": self.audit,
            "alpha": self.alpha,
            "tree": {
                "max_depth": self.tree.max_depth,
                "min_leaf_size": self.tree.min_leaf_size,
                "min_gain_ratio": self.tree.min_gain_ratio,
            },
        }


@lru_cache(maxsize=1)
def _validator() -> Draft202012Validator:
    schema = json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema)


def validate_config_dict(data: Any) -> None:
    error = best_match(_validator().iter_errors(data))
    if error is not None:
        where = "/".join(str(p) for p in error.absolute_path) or "<root>"
        raise ConfigError(f"invalid RunConfig at {where}: {error.message}")


def _resolve(base_dir: Path, p: Union[str, Path]) -> Path:
    p = Path(p)
    return p if p.is_absolute() else (base_dir / p)


def _dataset_ref(item: Mapping[str, Any], base_dir: Path) -> DatasetRef:
    if "synthetic" in item:
        s = item["synthetic"]
        return DatasetRef(
            name=item.get("name"),
            synthetic=SyntheticSpec(
                kind=s["kind"],
                n_major=int(s["n_major"]),
                n_minor=int(s["n_minor"]),
                overlap=float(s.get("overlap", 0.0)),
                seed=int(s.get("seed", 0)),
            ),
        )
    return DatasetRef(
        name=item.get("name"),
        path=_resolve(base_dir, item["path"]),
        label_column=item.get("label_column", "class"),
        positive_label=item.get("positive_label", 1),
        drop_incomplete=bool(item.get("drop_incomplete", False)),
        ignore_columns=tuple(item.get("ignore_columns", ())),
    )


def _threads_from_env(env: Mapping[str, str]) -> Optional[int]:
    raw = env.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from e
    if value == 0 or value < -1:
        raise ConfigError(f"{THREADS_ENV} must be -1 or >= 1, got {value}")
    return value


def run_config_from_dict(
    data: Mapping[str, Any],
    base_dir: Union[str, Path] = ".",
    overrides: Optional[Mapping[str, Any]] = None,
    env: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """Validate `data` against the schema and layer env/CLI overrides on top.

    Override keys: global_seed, k_folds, methods, output_dir, n_jobs, audit.
    None values are ignored.
    """
    validate_config_dict(data)
    base_dir = Path(base_dir)
    env = os.environ if env is None else env

    values: Dict[str, Any] = {
        "k_folds": data.get("k_folds", 10),
        "repeats": data.get("repeats", 3),
        "global_seed": data.get("global_seed", 0),
        "methods": list(data["methods"]),
        "output_dir": _resolve(base_dir, data.get("output_dir", "results")),
        "n_jobs": data.get("n_jobs", 1),
        "audit": data.get("audit", False),
        "alpha": data.get("alpha", 0.05),
    }
    threads = _threads_from_env(env)
    if threads is not None:
        values["n_jobs"] = threads
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in values:
            raise ConfigError(f"unknown override {key!r}")
        values[key] = Path(value) if key == "output_dir" else value

    tree = data.get("tree", {})
    try:
        tree_params = TreeParams(
            max_depth=tree.get("max_depth"),
            min_leaf_size=tree.get("min_leaf_size", 2),
            min_gain_ratio=tree.get("min_gain_ratio", 0.0),
        )
    except ValueError as e:
        raise ConfigError(f"invalid tree settings: {e}") from e

    return RunConfig(
        datasets=[_dataset_ref(item, base_dir) for item in data["datasets"]],
        method_params=copy.deepcopy(dict(data.get("method_params", {}))),
        tree=tree_params,
        description=data.get("description", ""),
        **values,
    )


def load_run_config(
    path: Union[str, Path],
    overrides: Optional[Mapping[str, Any]] = None,
    env: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    cfg = run_config_from_dict(data, base_dir=path.resolve().parent, overrides=overrides, env=env)
    log.info("loaded config %s: %d datasets, methods %s", path.name, len(cfg.datasets), cfg.methods)
    return cfg


# ----------------------------
# Per-dataset method settings
# ----------------------------

def _table_defaults(method: str, dataset: str, n: int) -> Dict[str, Any]:
    key = canonical_name(dataset)
    if method == "deep_smote" and key in DEEP_SMOTE_TABLE:
        hidden, t_count = DEEP_SMOTE_TABLE[key]
        return {"hidden": list(hidden), "t_count": t_count}

    if method in ("da_smote", "gan"):
        table = DA_SMOTE_TABLE if method == "da_smote" else GAN_TABLE
        if key in table:
            gen, disc = (list(w) for w in table[key])
            if _arch_fits(method, gen, disc, n):
                return {"gen_arch": gen, "disc_arch": disc}
            log.warning(
                "%s: %s table architecture %s / %s does not fit %d features; using the default",
                dataset, method, gen, disc, n,
            )
        gen, disc = default_arch(method, n)
        return {"gen_arch": gen, "disc_arch": disc}
    return {}


def resolve_method_settings(cfg: RunConfig, method: str, dataset: str, n_features: int) -> Dict[str, Any]:
    """Built-in defaults < table entry < config block < config per_dataset block."""
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}")
    settings = copy.deepcopy(BASE_DEFAULTS[method])
    settings.update(_table_defaults(method, dataset, n_features))

    block = dict(cfg.method_params.get(method, {}))
    per_dataset = block.pop("per_dataset", {})
    settings.update(block)
    override = dict(per_dataset.get(dataset, per_dataset.get(canonical_name(dataset), {})))
    override.pop("per_dataset", None)
    settings.update(override)

    if method in ("da_smote", "gan"):
        if not _arch_fits(method, list(settings["gen_arch"]), list(settings["disc_arch"]), n_features):
            raise ConfigError(
                f"{method} architecture {settings['gen_arch']} / {settings['disc_arch']} "
                f"does not fit dataset {dataset} with {n_features} features"
            )
    return settings
