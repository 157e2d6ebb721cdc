import numpy as np
import pytest
from hypothesis import settings

from ghlab.trig import TrigPoly

settings.register_profile("ghlab", max_examples=60, deadline=None)
settings.load_profile("ghlab")


def random_trig(rng: np.random.Generator, degree: int, scale: float = 1.0) -> TrigPoly:
    return TrigPoly(tuple(scale * rng.uniform(-1, 1, degree + 1)), tuple(scale * rng.uniform(-1, 1, degree)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Callable recording one PASS/FAIL line; a test that errors before recording counts as FAIL."""
    name = request.node.name.split("[")[0]
    recorded = []

    def report(passed: bool, detail: str) -> bool:
        recorded.append(True)
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}")
        return passed

    label = getattr(request.function, "label", name)
    yield report
    if not recorded:
        ACCEPTANCE_LINES.append(f"FAIL  {label}  (raised before reporting)")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
