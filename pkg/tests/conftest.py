import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tricolor.grammar import load_grammar  # noqa: E402
from tricolor.textformat import load_tdag  # noqa: E402

DATA = Path(__file__).resolve().parents[1] / "src" / "tricolor" / "data"


@pytest.fixture(scope="session")
def data():
    return DATA


@pytest.fixture(scope="session")
def en():
    return load_grammar(DATA / "en.patr")


@pytest.fixture(scope="session")
def ja():
    return load_grammar(DATA / "ja.patr")


@pytest.fixture
def wish():
    return load_tdag(DATA / "wish_en.tdag")


@pytest.fixture
def boston():
    return load_tdag(DATA / "boston.tdag")


@pytest.fixture
def aruku():
    return load_tdag(DATA / "aruku_ja.tdag")


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split()[0][2:])):
            terminalreporter.write_line(line)
