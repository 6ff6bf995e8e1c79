from __future__ import annotations

import pytest

from transitmesh import SyntheticConfig, TrajectoryLeg, TripMeta, generate_synthetic

_acceptance: list[tuple[str, str, float, str]] = []


def legs_of(*rows) -> list[TrajectoryLeg]:
    return [TrajectoryLeg(p, t, b, a) for p, t, b, a in rows]


def trips_for(legs, start_times=None) -> list[TripMeta]:
    start_times = start_times or {}
    ids = sorted({leg.trip_id for leg in legs})
    return [
        TripMeta(t, "r1", start_times.get(t, min(g.board_time for g in legs if g.trip_id == t)))
        for t in ids
    ]


@pytest.fixture(scope="session")
def synthetic_small():
    return generate_synthetic(SyntheticConfig(300, 30, 0.6, rng_seed=7))


def pytest_runtest_logreport(report):
    if report.when != "call" or "acceptance" not in report.keywords:
        return
    notes = "; ".join(f"{k}={v}" for k, v in report.user_properties)
    _acceptance.append((report.nodeid.rsplit("::", 1)[-1], report.outcome, report.duration, notes))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, duration, notes in _acceptance:
        mark = "PASS" if outcome == "passed" else "FAIL"
        extra = f" {notes}" if notes else ""
        terminalreporter.write_line(f"[{mark}] {name} ({duration:.2f}s){extra}")
