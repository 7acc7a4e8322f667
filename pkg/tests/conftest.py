import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qglab.fixtures import fixture_graph

# ODE-backed properties are slow per example; disable the wall-clock
# deadline globally and trim example counts where the call is expensive
settings.register_profile(
    "qglab",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("qglab")


@pytest.fixture(scope="session")
def interval_graph():
    return fixture_graph("interval")


@pytest.fixture(scope="session")
def star_graph():
    return fixture_graph("star3")


@pytest.fixture(scope="session")
def counterexample_graph():
    return fixture_graph("counterexample")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260817)
