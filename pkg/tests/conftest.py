import pytest

from exstab.enumeration import enumerate_pruned
from exstab.instance import all_instances_one_sided, all_instances_two_sided

ACCEPTANCE_LINES: list[str] = []


def _sweep(instances):
    rows = []
    for inst in instances:
        e = enumerate_pruned(inst, "e-stable").count
        s = enumerate_pruned(inst, "stable").count
        d = enumerate_pruned(inst, "doubly").count
        rows.append((e, s, d))
    return rows


@pytest.fixture(scope="session")
def sweep_two_2():
    return _sweep(all_instances_two_sided(2))


@pytest.fixture(scope="session")
def sweep_two_3():
    """(e-stable, stable, doubly) counts for all 46656 two-sided n=3 instances."""
    return _sweep(all_instances_two_sided(3))


@pytest.fixture(scope="session")
def sweep_one_4():
    return _sweep(all_instances_one_sided(4))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
