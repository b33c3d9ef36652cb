import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from echoscaffold import _backend  # noqa: E402

BACKENDS = [pytest.param(_backend.fallback, id="python")]
if _backend.compiled is not None:
    BACKENDS.append(pytest.param(_backend.compiled, id="compiled"))


@pytest.fixture(params=BACKENDS)
def kernels(request):
    """Each available kernel backend in turn."""
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# acceptance criterion number -> (title, outcome)
_acceptance: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    report = outcome.get_result()
    if report.when == "call" or report.outcome != "passed":
        number, title = marker.args
        _acceptance[number] = (title, report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        title, outcome = _acceptance[number]
        verdict = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"{verdict:5} AC{number}: {title}")
