import numpy as np
import pytest

from urnbandit.dynamics import BanditInstance, ConstantImpact, Polynomial


@pytest.fixture
def fig1():
    return BanditInstance((0.3, 0.5), (100.0, 1.0), Polynomial(1.5))


@pytest.fixture
def fig2():
    return BanditInstance((0.2, 0.4, 0.6), (10.0, 10.0, 1.0), Polynomial(1.5))


@pytest.fixture
def biased_pair():
    """Two equal-mean arms with different biases; tied means are fine for urn studies."""
    return BanditInstance((0.5, 0.5), (1.0, 2.0), Polynomial(2.0), allow_ties=True)


@pytest.fixture
def symmetric():
    def make(alpha=2.0):
        return BanditInstance((0.5, 0.5), (1.0, 1.0), Polynomial(alpha), allow_ties=True)

    return make


@pytest.fixture
def weak_incentive():
    return BanditInstance((0.3, 0.5), (100.0, 1.0), Polynomial(0.2), ConstantImpact(0.2))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance") or sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
