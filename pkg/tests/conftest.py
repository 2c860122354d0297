import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ucqres.query import parse_ucq  # noqa: E402

QUERIES = {
    "loop": "R(x,x)",
    "edge": "R(x,y)",
    "twocycle": "R(x,y) & R(y,x)",
    "path2": "R(x,y) & R(y,z)",
    "path3": "R(x,y) & R(y,z) & R(z,w)",
    "triangle": "R(x,y) & R(y,z) & R(z,x)",
    "cycle4": "R(x,y) & R(y,z) & R(z,w) & R(w,x)",
    "oriented4": "R(x,y) & R(y,z) & R(z,w) & R(x,w)",
    "rst": "R(x,y) & S(y,z) & T(z,x)",
    "rstu": "R(x,y) & S(y,z) & T(z,w) & U(w,x)",
}


@pytest.fixture
def q():
    return {k: parse_ucq(v) for k, v in QUERIES.items()}


@pytest.fixture
def rng():
    return random.Random(0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
