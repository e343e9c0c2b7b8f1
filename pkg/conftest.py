"""
Shared pytest fixtures
"""

from pathlib import Path

import pytest

from instance_io import flat4, gen_geometric_strip, swap4
from proximal import proximal_sets

TESTS_DIR = Path(__file__).parent / "tests"


@pytest.fixture
def fixtures_dir() -> Path:
    return TESTS_DIR


@pytest.fixture
def flat():
    instance = flat4()
    return instance, proximal_sets(instance)


@pytest.fixture
def swap():
    instance = swap4()
    return instance, proximal_sets(instance)


@pytest.fixture
def geometric():
    instance = gen_geometric_strip(4, 8)
    return instance, proximal_sets(instance)
