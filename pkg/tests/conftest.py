import pytest

from qpuarch.topology import build_topology

# Filled by test_acceptance.py; printed once at the end of the session.
ACCEPTANCE_RESULTS: dict[str, tuple[str, str]] = {}


@pytest.fixture(scope="session")
def graphs():
    cache = {}

    def get(m):
        if m not in cache:
            cache[m] = build_topology(m)
        return cache[m]

    return get


@pytest.fixture(scope="session")
def g2(graphs):
    return graphs(2)


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    ACCEPTANCE_RESULTS[name] = ("PASS" if report.passed else "FAIL", f"{report.duration:.2f}s")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (status, took) in sorted(ACCEPTANCE_RESULTS.items()):
        terminalreporter.write_line(f"{status}  {name}  ({took})")
