import pytest

from hwmopt import FundParameters

# one line per acceptance criterion, collected by test_acceptance and echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def table1(hwm=100.0, strike=100.0, maturity=1.0, **changes):
    base = FundParameters(
        spot=100.0, high_water_mark=hwm, strike=strike, maturity=maturity, rate=0.02,
        excess_return=0.10, management_fee=0.02, incentive_fraction=0.20, mean_return=0.15,
        volatility=0.20,
    )
    return base.with_(**changes) if changes else base


@pytest.fixture
def table1_params():
    return table1


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
