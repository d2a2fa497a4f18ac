import os
import sys

import hypothesis
import numpy as np
import pytest

# Add project root to path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.data.graph import build_grid, build_ring, normalized_laplacian  # noqa: E402
from src.spectral.basis import eig_smallest  # noqa: E402

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=20, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=500, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "fast"))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run full-size acceptance checks")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-size acceptance checks (run with --runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def ring_graph():
    return build_ring(40)


@pytest.fixture(scope="session")
def grid_graph():
    return build_grid(6, 7)


@pytest.fixture(scope="session")
def ring_basis(ring_graph):
    return eig_smallest(normalized_laplacian(ring_graph), 12)


@pytest.fixture(scope="session")
def grid_basis(grid_graph):
    return eig_smallest(normalized_laplacian(grid_graph), 12)
