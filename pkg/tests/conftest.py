import warnings

import pytest

from fracground import Grid, ProblemParams, bubble_scan, solve_ground_state

# Acceptance parameters and the resolved demonstration set.  With C = 1 the
# discrete minimizer concentrates at the grid scale (see the decisions
# ledger); C = 4 has a ground state of half-width ~0.44 that 128^2 on
# L = 12 resolves, so pipeline-level tests use it.
STANDARD = ProblemParams(s=0.5, N=2, a=1.0, b=1.0, C=1.0, q=3.0)
RESOLVED = ProblemParams(s=0.5, N=2, a=1.0, b=1.0, C=4.0, q=3.0)


@pytest.fixture(scope="session")
def standard_params():
    return STANDARD


@pytest.fixture(scope="session")
def resolved_params():
    return RESOLVED


@pytest.fixture(scope="session")
def resolved_solution():
    return solve_ground_state(RESOLVED, Grid(2, 128, 12.0))


@pytest.fixture(scope="session")
def resolved_scan():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return bubble_scan(RESOLVED, Grid(2, 256, 12.0), [0.8, 0.4, 0.2, 0.1])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(LINES):
            terminalreporter.write_line(LINES[k])
