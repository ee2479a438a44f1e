import numpy as np
import pytest

from mjs.catalog import make_flat_y, make_y_bent_helicoid, make_y_catenoid


@pytest.fixture(scope="session")
def ycat():
    return make_y_catenoid()


@pytest.fixture(scope="session")
def flat_y():
    return make_flat_y()


@pytest.fixture(scope="session")
def helicoid():
    return make_y_bent_helicoid()


@pytest.fixture(scope="session")
def wobbly_helicoid():
    return make_y_bent_helicoid(wobble=0.4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    log = request.config.stash[ACCEPTANCE_KEY]

    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        log.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
