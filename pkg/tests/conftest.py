import numpy as np
import pytest

from mdwindow import Params

DEFAULT = Params(0.3, 0.05)
ALPHA_GRID = (0.1, 0.3, 0.45)


@pytest.fixture(scope="session")
def default_params() -> Params:
    return DEFAULT


def three_se(p: float, n: int) -> float:
    return 3.0 * np.sqrt(max(p * (1.0 - p), 1e-12) / n)


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    status = "PASS" if report.passed else "FAIL"
    print(f"\n[{status}] {name} ({report.duration:.1f}s)", flush=True)
