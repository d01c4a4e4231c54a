from __future__ import annotations

import numpy as np
import pytest

from specrecon import SpectralDataset, WavelengthGrid
from specrecon.data import SAMPLE_CLASSES, load_sample


def grid_of(d: int) -> WavelengthGrid:
    return WavelengthGrid(400.0, 400.0 + d - 1, 1.0)


def random_dataset(rng: np.random.Generator, n: int, d: int, name: str = "random") -> SpectralDataset:
    """Reflectance-like random data: smooth-ish positive rows in [0.05, 0.95]."""
    base = rng.uniform(0.1, 0.6, size=(n, 1))
    X = base + 0.3 * rng.random((n, d)) * rng.random((1, d))
    return SpectralDataset.from_matrix(name, grid_of(d), np.clip(X, 0.05, 0.95))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def samples():
    return {name: load_sample(name) for name in SAMPLE_CLASSES}


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
