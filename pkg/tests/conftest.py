import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import instances  # noqa: E402


@pytest.fixture
def t0():
    return instances.t0()


@pytest.fixture
def t0_weak():
    return instances.t0_weak()


@pytest.fixture
def s0():
    return instances.s0()
