"""Child seed derivation.

Every random stream in a benchmark run is keyed by the run's global seed plus
the grid cell it belongs to, so two methods on the same (dataset, repeat)
see the same folds while each sampler draws from its own stream.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(*parts: object) -> int:
    text = "|".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    # 63 bits keeps the value a valid non-negative int64
    return int.from_bytes(digest[:8], "big") >> 1


def make_rng(*parts: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))
