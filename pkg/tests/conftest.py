from pathlib import Path

import pytest
from hypothesis import settings

from oam_storage_sim.io.config import load_config

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

_acceptance_lines: list[str] = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for an acceptance criterion."""

    def _report(label: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _acceptance_lines.append(line)
        print(line)
        return ok

    return _report


@pytest.fixture
def config_file():
    return lambda name: CONFIGS / name


@pytest.fixture
def revivals_config():
    return load_config(CONFIGS / "revivals.conf")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
