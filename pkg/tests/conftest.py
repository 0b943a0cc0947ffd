import numpy as np
import pytest

from ensemble_k.dataset import BlobSpec, Dataset, generate_blobs


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_blobs():
    return generate_blobs(BlobSpec(n_samples=300, seed=3))


@pytest.fixture(scope="session")
def two_blobs():
    """Two tight, well separated groups of 50 points."""
    r = np.random.default_rng(0)
    pts = np.vstack([r.normal(0.0, 0.3, (50, 2)), r.normal(6.0, 0.3, (50, 2))])
    return Dataset(pts, np.repeat([0, 1], 50), id="two")


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one acceptance line: ``verdict(criterion, ok, detail)``."""

    def record(criterion, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
