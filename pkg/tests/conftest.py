import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


class AcceptanceRecorder:
    """Collects named checks for one criterion and prints a single PASS/FAIL line."""

    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.checks = []

    def check(self, name, ok, detail=""):
        self.checks.append((name, bool(ok), detail))
        return bool(ok)

    def finish(self):
        failed = [(n, d) for n, ok, d in self.checks if not ok]
        status = "PASS" if not failed else "FAIL"
        summary = "; ".join(f"{n} ({d})" if d else n for n, d in failed) or f"{len(self.checks)} checks"
        line = f"criterion {self.number} {status}: {self.title} | {summary}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        assert not failed, "failed checks:\n" + "\n".join(f"  {n}: {d}" for n, d in failed)


@pytest.fixture
def criterion():
    return AcceptanceRecorder


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
