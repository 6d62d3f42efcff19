import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

from cograte.frame import reference_params  # noqa: E402
from cograte.sensing import OperatingPoint  # noqa: E402


@pytest.fixture
def params():
    """Reference frame at 0 dB (I_avg = 100)."""
    return reference_params()


@pytest.fixture
def reference_op():
    return OperatingPoint.fixed(p_d=0.91, p_f=0.23)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
