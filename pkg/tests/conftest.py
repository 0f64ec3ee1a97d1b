import pytest

from hetcast.degree_model import DegreeDistribution, Scenario
from hetcast.kernels import backends

REF_USERS = (("15/16", 0.1), ("9/16", 0.5))
REF_LT = DegreeDistribution.from_mapping({1: 0.0195, 2: 0.7814, 3: 0.1991})
REF_LT_SYS = DegreeDistribution.from_mapping({2: 0.7061, 3: 0.2939})


def two_user_scenario(N=1024, payload_bytes=32):
    return Scenario(N, ((15 / 16, 0.1), (9 / 16, 0.5)), payload_bytes)


@pytest.fixture
def two_user():
    return two_user_scenario()


@pytest.fixture(params=sorted(backends()))
def core(request):
    return backends()[request.param]


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[k])
