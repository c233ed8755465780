import pytest

from padicstab import PadicContext, RationalMap
from padicstab.stability import CertifyConfig, j_stability_certificate


@pytest.fixture(scope="session")
def ctx2():
    return PadicContext(2, 64)


@pytest.fixture(scope="session")
def ctx3():
    return PadicContext(3, 40)


@pytest.fixture(scope="session")
def worked():
    # (z^2 - z) / 2 over Q_2
    return RationalMap([0, -1, 1], [2])


@pytest.fixture(scope="session")
def worked_cert(worked):
    return j_stability_certificate(worked, 2, CertifyConfig())


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
