from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transitmesh import (
    SyntheticConfig,
    TrajectoryLeg,
    TripMeta,
    ValidationError,
    build_contact_graph,
    enumerate_all,
    generate_synthetic,
    load_trajectories,
    validate,
    write_trajectories,
)
from transitmesh.transfer_net import build_transfer_graph


def _write(tmp_path, legs_text, trips_text="trip_id,route_id,start_time\nt1,r1,415\n"):
    legs = tmp_path / "legs.csv"
    trips = tmp_path / "trips.csv"
    legs.write_text("passenger_id,trip_id,board_time,alight_time\n" + legs_text)
    trips.write_text(trips_text)
    return legs, trips


def test_minimal_file(tmp_path):
    legs, trips = load_trajectories(*_write(tmp_path, "p1,t1,420,450\n"))
    assert legs == [TrajectoryLeg("p1", "t1", 420, 450)]
    assert trips == [TripMeta("t1", "r1", 415)]


def test_header_only(tmp_path):
    assert load_trajectories(*_write(tmp_path, "", "trip_id,route_id,start_time\n")) == ([], [])


def test_inverted_interval_names_line(tmp_path):
    with pytest.raises(ValidationError) as exc:
        load_trajectories(*_write(tmp_path, "p0,t1,400,410\np1,t1,450,420\n"))
    assert exc.value.line == 3
    assert "line 3" in str(exc.value)


@pytest.mark.parametrize(
    "row, line",
    [
        ("p1,t1,420\n", 2),
        ("p1,t1,abc,450\n", 2),
        ("p1,t9,420,450\n", 2),
        ("p1,t1,420,420\n", 2),
        ("p1,t1,-5,450\n", 2),
        ("p 1,t1,420,450\n", 2),
        ("p1,t1,420,450\np1,t1,460,470\n", 3),
    ],
)
def test_bad_rows(tmp_path, row, line):
    with pytest.raises(ValidationError) as exc:
        load_trajectories(*_write(tmp_path, row))
    assert exc.value.line == line


def test_bad_header(tmp_path):
    legs = tmp_path / "legs.csv"
    legs.write_text("pid,trip,b,a\n")
    trips = tmp_path / "trips.csv"
    trips.write_text("trip_id,route_id,start_time\n")
    with pytest.raises(ValidationError, match="header"):
        load_trajectories(legs, trips)


def test_duplicate_trip(tmp_path):
    with pytest.raises(ValidationError, match="duplicate"):
        load_trajectories(*_write(tmp_path, "", "trip_id,route_id,start_time\nt1,r1,1\nt1,r2,2\n"))


def test_legs_sorted(tmp_path):
    legs, _ = load_trajectories(
        *_write(
            tmp_path,
            "p2,t1,430,440\np1,t2,500,510\np1,t1,420,450\n",
            "trip_id,route_id,start_time\nt1,r1,415\nt2,r1,495\n",
        )
    )
    assert [(g.passenger_id, g.board_time) for g in legs] == [("p1", 420), ("p1", 500), ("p2", 430)]


def test_after_midnight_times_are_plain_minutes(tmp_path):
    legs, _ = load_trajectories(
        *_write(tmp_path, "p1,t1,1470,1500\n", "trip_id,route_id,start_time\nt1,r5,1470\n")
    )
    assert legs[0].board_time == 1470


def test_round_trip(tmp_path, synthetic_small):
    legs, trips = synthetic_small
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_trajectories(legs, trips, a, b)
    loaded = load_trajectories(a, b)
    c, d = tmp_path / "c.csv", tmp_path / "d.csv"
    write_trajectories(*loaded, c, d)
    assert sorted(a.read_text().splitlines()) == sorted(c.read_text().splitlines())
    assert sorted(b.read_text().splitlines()) == sorted(d.read_text().splitlines())


def test_generator_deterministic(tmp_path):
    cfg = SyntheticConfig(200, 20, 0.5, rng_seed=42)
    paths = []
    for run in ("x", "y"):
        p, q = tmp_path / f"{run}_legs.csv", tmp_path / f"{run}_trips.csv"
        write_trajectories(*generate_synthetic(cfg), p, q)
        paths.append((p.read_bytes(), q.read_bytes()))
    assert paths[0] == paths[1]


def test_generator_seed_matters():
    a = generate_synthetic(SyntheticConfig(200, 20, 0.5, rng_seed=1))
    b = generate_synthetic(SyntheticConfig(200, 20, 0.5, rng_seed=2))
    assert a != b


def test_no_transfers_when_probability_zero():
    legs, trips = generate_synthetic(SyntheticConfig(300, 20, 0.0, rng_seed=3))
    per_passenger = Counter(g.passenger_id for g in legs)
    assert set(per_passenger.values()) == {1}
    graph = build_contact_graph(legs)
    groups, _ = enumerate_all(graph)
    assert build_transfer_graph(groups, graph, trips).edges == ()


def test_generator_output_validates():
    legs, trips = generate_synthetic(SyntheticConfig(50, 10, 0.5, rng_seed=1))
    assert len({g.passenger_id for g in legs}) == 50
    validate(legs, trips)
    for leg in legs:
        assert leg.alight_time > leg.board_time >= 0


def test_generator_emits_shared_transfers():
    legs, _ = generate_synthetic(SyntheticConfig(300, 30, 1.0, rng_seed=5))
    trips_of = {}
    for leg in legs:
        trips_of.setdefault(leg.passenger_id, []).append(leg.trip_id)
    signatures = Counter(tuple(t) for t in trips_of.values() if len(t) > 1)
    assert max(signatures.values()) >= 2


@settings(max_examples=25, deadline=None)
@given(
    passengers=st.integers(1, 120),
    trips=st.integers(1, 15),
    p=st.floats(0, 1),
    seed=st.integers(0, 2**32 - 1),
)
def test_generator_always_valid(passengers, trips, p, seed):
    legs, metas = generate_synthetic(SyntheticConfig(passengers, trips, p, rng_seed=seed))
    validate(legs, metas)
    assert legs == sorted(legs, key=lambda g: (g.passenger_id, g.board_time))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"passenger_count": 0},
        {"trip_count": 0},
        {"transfer_probability": 1.5},
        {"transfer_probability": -0.1},
        {"group_size_weights": ()},
        {"group_size_weights": (0.0, 0.0)},
        {"rng_seed": -1},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        generate_synthetic(SyntheticConfig(**kwargs))
