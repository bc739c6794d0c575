from __future__ import annotations

import os

import pytest
from hypothesis import HealthCheck, settings

from mintloc.geometry import FloorPlan, Point2D, WallSegment

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def room(x0=0.0, y0=0.0, x1=5.0, y1=5.0, obstructions=(), bss=()):
    walls = [
        WallSegment(Point2D(x0, y0), Point2D(x1, y0)),
        WallSegment(Point2D(x1, y0), Point2D(x1, y1)),
        WallSegment(Point2D(x1, y1), Point2D(x0, y1)),
        WallSegment(Point2D(x0, y1), Point2D(x0, y0)),
    ]
    obs = [WallSegment(Point2D(*o[:2]), Point2D(*o[2:]), False) for o in obstructions]
    return FloorPlan(walls, obs, [Point2D(*b) for b in bss])


@pytest.fixture
def square_room():
    return room(bss=[(1.0, 1.0)])


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion; returns the verdict for asserting."""
    def report(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
