import os
import sys

import pytest
import structlog

# Add the project directory to Python path, as run.py does
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


@pytest.fixture(autouse=True)
def reset_structlog():
    """Every test starts from the default structlog configuration."""
    structlog.reset_defaults()
    yield
    structlog.reset_defaults()


@pytest.fixture
def two_lane_graph():
    """Right lane r0 -> r1 at y=0 and left lane l0 -> l1 at y=3.5, 30 m segments."""
    from .helpers import two_lane_graph as build

    return build()
