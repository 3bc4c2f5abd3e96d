from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
if str(TESTS_DIR) not in sys.path:
    sys.path.insert(0, str(TESTS_DIR))

from adapter_wire import LineClient  # noqa: E402


@pytest.fixture
def client():
    c = LineClient()
    yield c
    c.close()
