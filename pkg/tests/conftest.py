import sys
from pathlib import Path

from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if report.when == "call":
        for key, line in report.user_properties:
            if key == "acceptance":
                _ACCEPTANCE[report.nodeid] = line


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for nodeid in sorted(_ACCEPTANCE, key=lambda s: int(s.split("_criterion_")[1].split("_")[0])):
            terminalreporter.write_line(_ACCEPTANCE[nodeid])
