import json
from functools import lru_cache
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


def load(name):
    return json.loads((DATA / name).read_text())


@lru_cache(maxsize=None)
def hg(g):
    from covers import compute_hg

    return compute_hg(g)


@lru_cache(maxsize=None)
def gamma(g, n, variant="quotient", subcomplex="full"):
    from covers.complex import gamma_complex

    return gamma_complex(g, n, variant, subcomplex)


@pytest.fixture
def data():
    return load


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
