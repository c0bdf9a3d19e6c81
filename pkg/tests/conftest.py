import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ridelasso import kernels  # noqa: E402

BACKENDS = kernels.available_backends()


@pytest.fixture(params=sorted(BACKENDS))
def backend(request):
    """Every kernel module available in this build."""
    return BACKENDS[request.param]


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
