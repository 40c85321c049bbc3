#!/usr/bin/env python3
# file: dyadicbloom/conftest.py
# Description: Shared pytest fixtures: small grids, seeded functions and weights.
# License: MIT

import numpy as np
import pytest

from dyadicbloom.lattice import GridFunction, GridSpec
from dyadicbloom.weights import RandomBoundedRatio, generate_weight


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def line():
    return GridSpec((3,))


@pytest.fixture
def plane():
    return GridSpec((3, 2))


@pytest.fixture
def cube():
    return GridSpec((3, 2, 2))


@pytest.fixture
def random_function():
    def make(spec: GridSpec, seed: int = 0) -> GridFunction:
        return GridFunction.random(spec, seed)
    return make


@pytest.fixture
def random_weight():
    def make(spec: GridSpec, seed: int = 0, rho: float = 4.0):
        return generate_weight(spec, RandomBoundedRatio(rho), seed)
    return make


@pytest.fixture
def quiet_settings(tmp_path, monkeypatch):
    """Settings with an empty fixture directory and one worker thread."""
    monkeypatch.setenv("DYADICBLOOM_FIXTURES", str(tmp_path / "fixtures"))
    monkeypatch.setenv("DYADICBLOOM_THREADS", "1")
    from dyadicbloom.config import get_settings
    return get_settings()
