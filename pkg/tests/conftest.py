import numpy as np
import pytest

from ictalgan.data.surrogate import SurrogateConfig, surrogate_generate
from ictalgan.tensor import precision


@pytest.fixture
def f64():
    with precision(np.float64):
        yield


@pytest.fixture(scope="session")
def small_dataset():
    """Two short patients: enough windows of both classes, quick to build."""
    cfg = SurrogateConfig(seed=7, n_patients=2, recording_seconds=1800.0,
                          seizures_per_recording=(2, 2))
    return surrogate_generate(cfg)


@pytest.fixture(scope="session")
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, {})

    def report(number: int, passed: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines[number] = line
        print(line)
        return passed

    return report


_ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(lines):
        terminalreporter.write_line(lines[number])
