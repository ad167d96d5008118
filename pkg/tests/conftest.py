from __future__ import annotations

import pathlib
import warnings

import pytest

from ptqlaw import Observation, PredictionRangeWarning, default_space, load_registry, predict

DATA_DIR = pathlib.Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def registry():
    return load_registry()


@pytest.fixture(scope="session")
def opt_grid():
    """The 6 x 4 x 4 x 4 grid the shipped fits were estimated on."""
    return default_space()


@pytest.fixture(scope="session")
def fixture_csv_path():
    return DATA_DIR / "synthetic_384.csv"


def noiseless_observations(params, space, task="general"):
    """Exact law evaluations over a grid, as fit observations."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PredictionRangeWarning)
        return tuple(
            Observation(config=cfg, task=task, accuracy=predict(params, cfg))
            for cfg in space.configs()
        )
