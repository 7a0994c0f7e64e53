import random

import pytest

from tilekit.fibers import szabo_construct
from tilekit.multiset import Multiset
from tilekit.search import build_corpus

# criterion number -> (passed, note); filled in by test_acceptance.py
CRITERIA: dict = {}


@pytest.fixture(scope="session")
def corpus():
    return build_corpus()


@pytest.fixture(scope="session")
def szabo():
    return szabo_construct(3, 5, 7)


@pytest.fixture
def rng():
    return random.Random(1234)


def random_multiset(rng, M, k=None, lo=-3, hi=3):
    w = {}
    for _ in range(k if k is not None else rng.randint(1, 6)):
        w[rng.randrange(M)] = rng.randint(lo, hi)
    return Multiset.from_weights(M, w)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        ok, note = CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {note}")
