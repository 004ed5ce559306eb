import numpy as np
import pytest

from cellfree.config import Config, DeploymentConfig


@pytest.fixture
def small_config():
    """Scaled-down embedding (same densities as the default) for fast harness tests."""
    config = Config()
    config.deployment = DeploymentConfig(area_side=1000.0, focus_side=400.0, n_aps=100,
                                         n_ues=25, n_aps_focus=16, n_ues_focus=4, n_per_side=2)
    config.experiment.n_snapshots = 6
    return config


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
