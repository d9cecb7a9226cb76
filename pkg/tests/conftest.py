import os

import numpy as np
import pytest

from fourierdirac import spectral

os.environ.pop("FOURIERDIRAC_CACHE_DIR", None)

PROFILE_WINDOW = (-12.0, 1.0, 0.01)

# criterion number -> (passed, summary line); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def _profile(kind):
    return spectral.potential_profile(kind, spectral.uniform_grid(*PROFILE_WINDOW))


@pytest.fixture(scope="session")
def profile_cos():
    return _profile("cos")


@pytest.fixture(scope="session")
def profile_sin():
    return _profile("sin")


@pytest.fixture(scope="session")
def profiles(profile_cos, profile_sin):
    return {"cos": profile_cos, "sin": profile_sin}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, line = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {line}")
