import sys

import pytest

from oqhobound import oqho
from oqhobound.certificate import make_certificate


@pytest.fixture
def worked():
    """Worked model pipeline: params, state space, invariant state, certificate at mu=1."""
    params = oqho.worked_example()
    ss = oqho.build_state_space(params)
    inv = oqho.invariant_model(params, ss)
    cert = make_certificate(ss, inv, params, 1.0)
    return params, ss, inv, cert


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
