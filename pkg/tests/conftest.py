"""Pytest configuration: put src/ on the path and expose the fixture documents"""

import json
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).parent.parent

# Import the package from the source tree without installing it
sys.path.insert(0, str(ROOT / "src"))

FIXTURES = ROOT / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def load_fixture():
    """Parsed JSON of a file under fixtures/"""

    def load(name: str) -> dict:
        return json.loads((FIXTURES / name).read_text(encoding="utf-8"))

    return load
