import re

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from inflation_rf.panel_data import assemble_dataset
from inflation_rf.synth import SynthSpec, synth_panel

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def default_panel():
    return synth_panel(SynthSpec())


@pytest.fixture(scope="session")
def default_ds(default_panel):
    return assemble_dataset(default_panel)


@pytest.fixture(scope="session")
def small_panel():
    return synth_panel(SynthSpec(n_countries=3, months=60, seed=7))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record ``(criterion, passed, detail)`` for the end-of-run summary."""

    def record(criterion: str, passed: bool, detail: str):
        ACCEPTANCE[criterion] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda s: (int(re.match(r"\d+", s).group()), s)):
        passed, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
