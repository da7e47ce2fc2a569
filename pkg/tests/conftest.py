import os

import pytest
from hypothesis import HealthCheck, settings

from qrxvlp.optics import QrxOpticalConfig, build_g_qrx
from qrxvlp.pipeline import SystemConfig

settings.register_profile("default", deadline=None, max_examples=100, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def optics():
    return QrxOpticalConfig()


@pytest.fixture(scope="session")
def table(optics):
    return build_g_qrx(optics)


@pytest.fixture(scope="session")
def system():
    return SystemConfig()


@pytest.fixture(scope="session")
def fast_system():
    """Short buffers for unit tests: 30 kHz sampling."""
    return SystemConfig(sample_rate=30e3)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion and assert it."""

    def _report(tag: str, ok: bool, detail: str):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {tag}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
