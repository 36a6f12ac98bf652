import pytest

from supereff import _kernels
from supereff.distributions import EffectDistribution, PopulationSpec
from supereff.estimators import EstimatorKind
from supereff.simulation import SimulationConfig


@pytest.fixture(params=sorted(_kernels.BACKENDS))
def backend(request):
    return request.param


@pytest.fixture
def two_point():
    return EffectDistribution.two_point(0.0, 2.0, 0.5)


@pytest.fixture
def standard_population():
    return PopulationSpec(EffectDistribution.uniform(0.0, 1.0), EffectDistribution.two_point(0.0, 2.0, 0.5), 0.5)


def synthetic_config(n_grid, R, seed=1, sigma=1.0, **kw):
    pop = PopulationSpec(EffectDistribution.degenerate(0.0), EffectDistribution.two_point(0.0, 2.0, 0.5), 0.5)
    return SimulationConfig(pop, EstimatorKind("synthetic_normal", sigma), tuple(n_grid), R, seed, **kw)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py::" in rep.nodeid and rep.when == "call":
                lines.append((rep.nodeid.split("::")[-1], outcome.upper()))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, outcome in sorted(lines):
            terminalreporter.write_line(f"{outcome:6s} {name}")
