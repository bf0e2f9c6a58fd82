import os

# Keep test runs from writing daily log files into the working tree
os.environ.setdefault("STGNCDE_LOG_DIR", "")
os.environ.setdefault("STGNCDE_NUM_WORKERS", "1")

import numpy as np
import pytest

from stgncde.config import RunConfig
from stgncde.interpolation import build_control_paths
from stgncde.models import ModelDims, create_model
from stgncde.solver import SolverConfig

TINY_DIMS = ModelDims(
    num_nodes=4,
    input_dim=1,
    hidden_h=8,
    hidden_z=8,
    num_layers=1,
    embed_dim=2,
    horizon=12,
    output_dim=1,
)


@pytest.fixture
def tiny_dims():
    return TINY_DIMS


@pytest.fixture
def tiny_window():
    """Two windows of 12 points (N = 11) for 4 nodes, one channel"""
    rng = np.random.default_rng(3)
    return rng.normal(size=(2, 4, 12, 1))


@pytest.fixture
def tiny_path(tiny_window):
    return build_control_paths(tiny_window)


@pytest.fixture
def tiny_targets():
    rng = np.random.default_rng(4)
    return rng.normal(size=(2, 4, 12, 1))


@pytest.fixture
def make_model(tiny_dims):
    def factory(variant="full", method="rk4", steps_per_unit=1, seed=0, dims=None):
        return create_model(variant, dims or tiny_dims, SolverConfig(method, steps_per_unit), seed=seed)
    return factory


@pytest.fixture
def small_config():
    """A synthetic run small enough to train in seconds"""
    return RunConfig(
        dataset="synthetic",
        synthetic_nodes=3,
        synthetic_steps=200,
        hidden_h=4,
        hidden_z=4,
        epochs=2,
        batch_size=32,
        num_workers=1,
        log_wall_time=False,
        seed=0,
    )


@pytest.fixture
def small_overrides():
    return [
        "synthetic_nodes=3",
        "synthetic_steps=200",
        "hidden_h=4",
        "hidden_z=4",
        "epochs=2",
        "batch_size=32",
        "num_workers=1",
        "log_wall_time=false",
    ]
