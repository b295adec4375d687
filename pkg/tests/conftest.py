import sys
from pathlib import Path

import pytest

from serkit.cli import fixture_dir, load_config

sys.path.insert(0, str(Path(__file__).parent))

SEED = 20121
FIXTURES = ("bpsk", "rank1", "qpsk", "qam16", "complex_qpsk", "cube", "qam3d")


def load_fixture(name: str):
    """Constellation described by a packaged fixture."""
    return load_config(fixture_dir() / f"{name}.json")[1]


@pytest.fixture
def fixture_path():
    return lambda name: fixture_dir() / f"{name}.json"


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines, key=_criterion_key):
            terminalreporter.write_line(lines[key])


def _criterion_key(key: str):
    num = "".join(ch for ch in key if ch.isdigit())
    return int(num), key
