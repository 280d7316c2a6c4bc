import time

import numpy as np
import pytest
from hypothesis import settings

from quadchaos import spectral_summary
from quadchaos.reference import indefinite_example, psd_example

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def psd():
    return spectral_summary(psd_example())


@pytest.fixture(scope="session")
def indefinite():
    return spectral_summary(indefinite_example())


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


_CRITERIA = pytest.StashKey[list]()


class _Criterion:
    def __init__(self, log, number, budget):
        self.log, self.number, self.budget = log, number, budget

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        ok = exc_type is None and elapsed < self.budget
        line = f"criterion {self.number}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f} s, budget {self.budget:g} s)"
        if exc_type is not None:
            line += f" -- {exc_type.__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        self.log.append((self.number, line))
        print(line)
        if exc_type is None and not ok:
            raise AssertionError(f"criterion {self.number} exceeded its {self.budget:g} s budget")
        return False


@pytest.fixture
def criterion(request):
    """``with criterion(n, budget_s):`` records a pass/fail line for acceptance criterion ``n``."""
    log = request.config.stash.setdefault(_CRITERIA, [])
    return lambda number, budget: _Criterion(log, number, budget)


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(_CRITERIA, [])
    if log:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(log):
            terminalreporter.write_line(line)
