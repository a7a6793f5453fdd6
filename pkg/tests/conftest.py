import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def blobs(rng):
    """Two 2-D Gaussian blobs with a contact zone: (minority, majority)."""
    minority = rng.normal(loc=(0.35, 0.5), scale=0.08, size=(40, 2))
    majority = rng.normal(loc=(0.65, 0.5), scale=0.10, size=(160, 2))
    return minority, majority


@pytest.fixture
def write_csv_text(tmp_path):
    def write(text: str, name: str = "data.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write
