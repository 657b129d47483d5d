import os

import pytest
from hypothesis import HealthCheck, settings

from gptctx.zoo import make_noisy_bit, make_polygon, make_simplex, make_square_gbit, make_toy_bit

settings.register_profile(
    "default", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def zoo_systems():
    return [
        make_simplex(1), make_simplex(2), make_simplex(3), make_simplex(4),
        make_noisy_bit(0.1), make_noisy_bit(0.25), make_noisy_bit(0.4),
        make_toy_bit(), make_square_gbit(), make_polygon(3), make_polygon(5), make_polygon(6),
    ]


@pytest.fixture(scope="session")
def zoo():
    return zoo_systems()


ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Log one acceptance line and fail the test if the check did not hold."""
    def _record(number, title, passed, detail):
        line = "[%s] criterion %2d  %s: %s" % ("PASS" if passed else "FAIL", number, title, detail)
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split()[0])):
            terminalreporter.write_line(line)
