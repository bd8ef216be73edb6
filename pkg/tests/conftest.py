import re
import time

import numpy as np
import pytest

from vlpbenson.scalarizations import make_problem
from vlpbenson.twophase import SolveOptions, solve


def instance_a():
    """x1 + x2 >= 1, x >= 0, P = I, C = R^2_+."""
    return make_problem([[1, 1], [1, 0], [0, 1]], [1, 0, 0], None, None, None, np.eye(2))


def instance_b():
    """One variable x >= 0 with image (x, -x)."""
    return make_problem(None, None, None, [0], None, [[1], [-1]])


def empty_primal():
    # 0 x >= 1 on a box: the dual side is fine, the feasible set is empty
    return make_problem([[0, 0]], [1], None, [0, 0], [1, 1], np.eye(2))


def empty_dual():
    return make_problem(None, None, None, [0], None, [[-1], [-1]])


def free_line():
    return make_problem(None, None, None, None, None, [[1], [-1]])


@pytest.fixture
def inst_a():
    return instance_a()


@pytest.fixture
def inst_b():
    return instance_b()


class CorpusRuns:
    """Solutions of the regression corpus, computed once per session."""

    def __init__(self):
        from corpus import load_oracle, random_instance

        self.entries = load_oracle()
        self.problems = [random_instance(e["seed"]) for e in self.entries]
        self.solutions = {}
        self.seconds = {}

    def get(self, algorithm):
        if algorithm not in self.solutions:
            t0 = time.perf_counter()
            out = []
            for prob in self.problems:
                status, sol = solve(prob, SolveOptions(algorithm=algorithm))
                out.append((status, sol))
            self.seconds[algorithm] = time.perf_counter() - t0
            self.solutions[algorithm] = out
        return self.solutions[algorithm]


@pytest.fixture(scope="session")
def corpus_runs():
    return CorpusRuns()


_criteria = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2))
    if report.when == "call" or report.failed:
        prev = _criteria.get(key, "PASS")
        _criteria[key] = "FAIL" if report.failed or prev == "FAIL" else (
            "SKIP" if report.skipped else "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (num, name), outcome in sorted(_criteria.items()):
        terminalreporter.write_line(f"criterion {num} [{outcome}] {name.replace('_', ' ')}")
