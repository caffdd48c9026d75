from __future__ import annotations

import pytest

from hada.clock import Clock
from hada.identifiers import IdFactory


@pytest.fixture
def clock() -> Clock:
    return Clock(mode="simulated")


@pytest.fixture
def ids() -> IdFactory:
    return IdFactory()
