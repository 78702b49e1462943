import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.core.grid import TimeGrid
from src.models.registry import build_model
from src.models.spec import ModelId, ModelName


SEED = 20240611


@pytest.fixture
def seed():
    return SEED


@pytest.fixture
def continuous_grid():
    return TimeGrid.continuous(50.0, 0.05)


@pytest.fixture
def discrete_grid():
    return TimeGrid.discrete(500)


@pytest.fixture
def linear_model(continuous_grid):
    return build_model(ModelId.of(ModelName.LINEAR_STANDARD), continuous_grid)


@pytest.fixture
def slow_gain_model(continuous_grid):
    return build_model(ModelId.of(ModelName.RM_SLOW_GAIN), continuous_grid)


@pytest.fixture
def block_size(monkeypatch):
    """Shrink Monte Carlo blocks so small runs still span several blocks."""
    from dataclasses import replace
    from src.config import settings

    def set_size(size: int):
        monkeypatch.setattr(settings, "runner", replace(settings.runner, block_size=size))

    return set_size
