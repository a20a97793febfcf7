import os
import sys

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from walkcount.digraph import from_matrix  # noqa: E402
from walkcount.regex import AutomatonSystem, compile_regex  # noqa: E402

DATA = os.path.join(os.path.dirname(__file__), os.pardir, "data")

EX1_REGEX = "a*ba*b(a|b)*"
EX2_MATRIX = [[2, 1, 1, 0], [0, 2, 0, 0], [0, 0, 0, 1], [0, 0, 4, 0]]
EX3_MATRIX = [
    [0, 1, 2, 0, 1],
    [0, 2, 0, 0, 0],
    [0, 0, 0, 2, 0],
    [0, 0, 2, 0, 1],
    [0, 0, 0, 0, 0],
]


@pytest.fixture
def ex1():
    return compile_regex(EX1_REGEX)


@pytest.fixture
def ex2():
    return from_matrix(EX2_MATRIX)


@pytest.fixture
def ex3():
    return AutomatonSystem(from_matrix(EX3_MATRIX), frozenset({1}), frozenset({2, 3, 5}))


@pytest.fixture
def data_dir():
    return os.path.abspath(DATA)


def square_matrices(max_n=5, high=3):
    """Hypothesis strategy: small nonnegative integer matrices as nested lists."""
    return st.integers(1, max_n).flatmap(
        lambda n: st.lists(
            st.lists(st.integers(0, high), min_size=n, max_size=n), min_size=n, max_size=n
        )
    )


def as_array(M):
    return np.array(M, dtype=float)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.summary_lines():
            terminalreporter.write_line(line)
