import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def tm():
    from afcxpm.material import preset

    return preset("tm_linbo3")



@pytest.fixture
def criterion(request):
    """Context manager factory that records one PASS/FAIL line per acceptance criterion."""
    lines = request.config.__dict__.setdefault("acceptance_lines", [])

    class _Criterion:
        def __init__(self, number, title):
            self.number, self.title, self.detail = number, title, ""

        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            status = "PASS" if exc_type is None else "FAIL"
            line = f"criterion {self.number}: {status}  {self.title}"
            if self.detail:
                line += f"  [{self.detail}]"
            if exc_type is not None:
                line += f"  ({exc_type.__name__}: {str(exc).splitlines()[0] if str(exc) else ''})"
            lines.append(line)
            print(line)
            return False

    return _Criterion


def pytest_terminal_summary(terminalreporter, config):
    lines = config.__dict__.get("acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
