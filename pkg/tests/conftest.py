import numpy as np
import pytest

from roadtcp.scenario import RoadScenario, RoadSegment, SegmentKind

# criterion label -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def straight(length):
    return RoadSegment(SegmentKind.STRAIGHT, 0.0, 0.0, length)


def left(angle, pivot, length):
    return RoadSegment(SegmentKind.LEFT, angle, pivot, length)


def right(angle, pivot, length):
    return RoadSegment(SegmentKind.RIGHT, angle, pivot, length)


def make_scenario(sid="s", segments=None, start=(0, 0), end=(100, 0), cost=1.0, label=None):
    return RoadScenario(sid, tuple(segments or [straight(100)]), start, end, cost, label)


def line_distances(coords):
    """Distance matrix for points on a line, by hand arithmetic."""
    c = np.asarray(coords, dtype=float)
    return np.abs(c[:, None] - c[None, :])
