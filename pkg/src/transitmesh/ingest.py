"""Trajectory ingestion, validation and synthetic data generation.

Only on-vehicle legs are modelled. Times are integer minutes since the start
of the service day and may run past 1440 for after-midnight trips that belong
to the same service day.
"""

from __future__ import annotations

import csv
import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from ._io import atomic_writer

LEG_HEADER = ("passenger_id", "trip_id", "board_time", "alight_time")
TRIP_HEADER = ("trip_id", "route_id", "start_time")

_ID_RE = re.compile(r"[A-Za-z0-9_./:-]+")


class ValidationError(ValueError):
    """Input data violates a schema or domain invariant."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.reason = message
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class TrajectoryLeg(NamedTuple):
    passenger_id: str
    trip_id: str
    board_time: int
    alight_time: int


class TripMeta(NamedTuple):
    trip_id: str
    route_id: str
    start_time: int


@dataclass(frozen=True)
class SyntheticConfig:
    """Knobs for :func:`generate_synthetic`.

    ``group_size_weights[i]`` is the relative weight of a commuter group of
    size ``i + 1``.
    """

    passenger_count: int = 1000
    trip_count: int = 100
    transfer_probability: float = 0.5
    group_size_weights: tuple[float, ...] = (0.30, 0.25, 0.15, 0.10, 0.08, 0.06, 0.06)
    rng_seed: int = 0
    max_legs: int = 3
    day_start: int = 300
    day_end: int = 1380

    def validate(self) -> None:
        if self.passenger_count < 1:
            raise ValueError("passenger_count must be positive")
        if self.trip_count < 1:
            raise ValueError("trip_count must be positive")
        if not 0.0 <= self.transfer_probability <= 1.0:
            raise ValueError("transfer_probability must lie in [0, 1]")
        if not self.group_size_weights or any(w < 0 for w in self.group_size_weights):
            raise ValueError("group_size_weights must be non-empty and non-negative")
        if sum(self.group_size_weights) <= 0:
            raise ValueError("group_size_weights must not sum to zero")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be unsigned")
        if self.max_legs < 1:
            raise ValueError("max_legs must be positive")
        if not 0 <= self.day_start < self.day_end:
            raise ValueError("day_start must be non-negative and before day_end")


def validate(legs: Sequence[TrajectoryLeg], trips: Sequence[TripMeta]) -> None:
    """Check every leg/trip invariant; raise ValidationError on the first failure."""
    trip_ids: set[str] = set()
    for trip in trips:
        _check_id(trip.trip_id, "trip_id")
        _check_id(trip.route_id, "route_id")
        if trip.trip_id in trip_ids:
            raise ValidationError(f"duplicate trip_id {trip.trip_id!r}")
        trip_ids.add(trip.trip_id)
    seen: set[tuple[str, str]] = set()
    for leg in legs:
        _check_leg(leg, trip_ids, seen)


def _check_id(value: str, name: str, line: int | None = None) -> None:
    if not _ID_RE.fullmatch(value):
        raise ValidationError(f"invalid {name} {value!r}", line)


def _check_leg(
    leg: TrajectoryLeg,
    trip_ids: set[str],
    seen: set[tuple[str, str]],
    line: int | None = None,
) -> None:
    _check_id(leg.passenger_id, "passenger_id", line)
    _check_id(leg.trip_id, "trip_id", line)
    if leg.board_time < 0:
        raise ValidationError("board_time must be non-negative", line)
    if leg.alight_time <= leg.board_time:
        raise ValidationError(
            f"alight_time {leg.alight_time} is not after board_time {leg.board_time}", line
        )
    if leg.trip_id not in trip_ids:
        raise ValidationError(f"leg references unknown trip {leg.trip_id!r}", line)
    key = (leg.passenger_id, leg.trip_id)
    if key in seen:
        raise ValidationError(
            f"passenger {leg.passenger_id!r} rides trip {leg.trip_id!r} more than once", line
        )
    seen.add(key)


def _read_rows(path: Path, header: tuple[str, ...]) -> Iterable[tuple[int, list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None:
            raise ValidationError("missing header", 1, str(path))
        if tuple(c.strip() for c in first) != header:
            raise ValidationError(f"expected header {','.join(header)}", 1, str(path))
        for row in reader:
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise ValidationError(
                    f"expected {len(header)} fields, got {len(row)}", reader.line_num, str(path)
                )
            yield reader.line_num, [c.strip() for c in row]


def _parse_int(text: str, name: str, line: int, path: Path) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValidationError(f"{name} is not an integer: {text!r}", line, str(path)) from None


def load_trips(path: str | Path) -> list[TripMeta]:
    path = Path(path)
    trips = []
    seen: set[str] = set()
    for line, (trip_id, route_id, start) in _read_rows(path, TRIP_HEADER):
        try:
            _check_id(trip_id, "trip_id", line)
            _check_id(route_id, "route_id", line)
        except ValidationError as exc:
            raise ValidationError(exc.reason, line, str(path)) from None
        if trip_id in seen:
            raise ValidationError(f"duplicate trip_id {trip_id!r}", line, str(path))
        seen.add(trip_id)
        trips.append(TripMeta(trip_id, route_id, _parse_int(start, "start_time", line, path)))
    return trips


def load_trajectories(
    path: str | Path, trips_path: str | Path
) -> tuple[list[TrajectoryLeg], list[TripMeta]]:
    """Read and validate a trajectories CSV together with its trips CSV.

    Returns legs sorted by ``(passenger_id, board_time)`` and trips in file
    order. Any problem raises :class:`ValidationError` carrying the offending
    line number.
    """
    path = Path(path)
    trips = load_trips(trips_path)
    trip_ids = {t.trip_id for t in trips}
    legs = []
    seen: set[tuple[str, str]] = set()
    for line, (pid, tid, board, alight) in _read_rows(path, LEG_HEADER):
        leg = TrajectoryLeg(
            pid,
            tid,
            _parse_int(board, "board_time", line, path),
            _parse_int(alight, "alight_time", line, path),
        )
        try:
            _check_leg(leg, trip_ids, seen, line)
        except ValidationError as exc:
            raise ValidationError(exc.reason, line, str(path)) from None
        legs.append(leg)
    legs.sort(key=lambda g: (g.passenger_id, g.board_time))
    return legs, trips


def write_trajectories(
    legs: Iterable[TrajectoryLeg],
    trips: Iterable[TripMeta],
    path: str | Path,
    trips_path: str | Path,
) -> None:
    with atomic_writer(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LEG_HEADER)
        w.writerows(legs)
    with atomic_writer(trips_path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIP_HEADER)
        w.writerows(trips)


def generate_synthetic(config: SyntheticConfig) -> tuple[list[TrajectoryLeg], list[TripMeta]]:
    """Generate a commuter-style dataset.

    Passengers come in groups that ride a vehicle together with a little
    per-member jitter on boarding and alighting. After each leg the whole
    group moves on to another running trip with probability
    ``transfer_probability`` (at most ``max_legs`` legs per passenger), which
    gives the downstream pipeline cliques that repeat across trips.
    """
    config.validate()
    rng = random.Random(config.rng_seed)

    windows = []
    for _ in range(config.trip_count):
        start = rng.randrange(config.day_start, config.day_end)
        windows.append((start, start + rng.randint(30, 90)))
    windows.sort()
    n_routes = max(1, config.trip_count // 4)
    tw = len(str(config.trip_count - 1))
    rw = len(str(n_routes - 1))
    trips = [
        TripMeta(f"t{k:0{tw}d}", f"r{rng.randrange(n_routes):0{rw}d}", start)
        for k, (start, _) in enumerate(windows)
    ]
    ends = [end for _, end in windows]

    sizes = range(1, len(config.group_size_weights) + 1)
    pw = len(str(config.passenger_count - 1))
    legs: list[TrajectoryLeg] = []
    assigned = 0
    while assigned < config.passenger_count:
        size = min(rng.choices(sizes, config.group_size_weights)[0], config.passenger_count - assigned)
        members = [f"p{assigned + i:0{pw}d}" for i in range(size)]
        assigned += size

        k = rng.randrange(config.trip_count)
        board = trips[k].start_time + rng.randint(0, (ends[k] - trips[k].start_time) // 2)
        used = {k}
        while True:
            alight = rng.randint(board + 5, ends[k])
            for pid in members:
                b, a = board, alight
                if rng.random() < 0.3:
                    b += rng.randint(0, 3)
                    a -= rng.randint(0, 3)
                    if a <= b:
                        b, a = board, alight
                legs.append(TrajectoryLeg(pid, trips[k].trip_id, b, a))
            if len(used) >= config.max_legs or rng.random() >= config.transfer_probability:
                break
            candidates = [
                j
                for j in range(config.trip_count)
                if j not in used
                and trips[j].start_time <= alight + 45
                and ends[j] - 5 > max(alight + 15, trips[j].start_time)
            ]
            if not candidates:
                break
            k = rng.choice(candidates)
            used.add(k)
            board = max(alight + rng.randint(0, 15), trips[k].start_time)

    legs.sort(key=lambda g: (g.passenger_id, g.board_time))
    validate(legs, trips)
    return legs, trips
