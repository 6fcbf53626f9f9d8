import os
from pathlib import Path

import pytest

from bbviz.data import (load_satimage, load_wine, materialize_synthetic_satimage,
                        materialize_wine)
from bbviz.perturb import standardize_dataset


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory) -> Path:
    return tmp_path_factory.mktemp("datasets")


@pytest.fixture(scope="session")
def wine_path(data_dir) -> Path:
    return materialize_wine(data_dir / "wine.data")


@pytest.fixture(scope="session")
def wine(wine_path):
    return load_wine(wine_path)


@pytest.fixture(scope="session")
def wine_std(wine):
    return standardize_dataset(wine)


@pytest.fixture(scope="session")
def satimage_path(data_dir) -> Path:
    """Real training file when $BBC_DATA_DIR provides one, else the synthetic
    stand-in with the canonical class counts."""
    real = Path(os.environ.get("BBC_DATA_DIR", "data")) / "sat.trn"
    if real.exists():
        return real
    return materialize_synthetic_satimage(data_dir / "sat.synthetic.trn")


@pytest.fixture(scope="session")
def satimage(satimage_path):
    return load_satimage(satimage_path, drop_last_class=True)
