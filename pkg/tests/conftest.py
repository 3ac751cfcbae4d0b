import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from formalparse.signature import parse_signature  # noqa: E402

DATA = Path(__file__).resolve().parents[1] / "src" / "formalparse" / "data"

SMALL_SIG = """
const sin : (fun real real)
const cos : (fun real real)
const plus_r : (fun real (fun real real))
const amp : (fun num real)
const zero : num
const c_i : complex
const id : (fun ?a ?a)
const pair : (fun ?a (fun ?b (prod ?a ?b)))
var x : real
coercion amp
"""


@pytest.fixture
def sig():
    return parse_signature(SMALL_SIG)


@pytest.fixture
def data_dir():
    return DATA


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
