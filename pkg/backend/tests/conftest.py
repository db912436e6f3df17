import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sparseconv.models.layer import LayerSpec
from sparseconv.preset_manager import PresetManager

# numba compiles on first call, far beyond any per-example deadline
settings.register_profile(
    "default",
    settings(deadline=None, max_examples=200, suppress_health_check=[HealthCheck.too_slow]),
)
settings.register_profile("quick", settings(deadline=None, max_examples=25))
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def presets():
    manager = PresetManager()
    manager.load_presets()
    return manager


@pytest.fixture(scope="session")
def conv5():
    return LayerSpec(N=256, C=384, R=3, S=3, H_in=13, W_in=13, stride=1, pad=1)


@pytest.fixture(scope="session")
def bdw(presets):
    return presets.platform("BDW")


@pytest.fixture(scope="session")
def atom(presets):
    return presets.platform("Atom")


def random_weights(rng, shape, density):
    """Gaussian weights with roughly ``density`` of them kept."""
    w = rng.standard_normal(shape).astype(np.float32)
    w[rng.random(shape) >= density] = 0.0
    return w


def pytest_addoption(parser):
    parser.addoption("--run-bench", action="store_true", default=False,
                     help="run timing tests that depend on the host machine")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-bench"):
        return
    skip = pytest.mark.skip(reason="host timing test, pass --run-bench")
    for item in items:
        if "bench" in item.keywords:
            item.add_marker(skip)
