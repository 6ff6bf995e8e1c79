"""Directed transfer network over atomic groups, and trip-pair traffic scores."""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

from ._io import atomic_writer
from .cliques import AtomicGroup
from .contact_net import ContactGraph
from .ingest import TripMeta

TRANSFER_HEADER = ("from_group", "to_group", "from_trip", "to_trip", "weight")
PAIR_HEADER = ("trip_i", "trip_j", "m")


class TransferEdge(NamedTuple):
    source: int
    target: int
    source_trip: str
    target_trip: str
    weight: int
    shared: frozenset[str]


class TripPairScore(NamedTuple):
    trip_i: str
    trip_j: str
    m: int


@dataclass(frozen=True)
class TransferGraph:
    groups: dict[int, AtomicGroup]
    edges: tuple[TransferEdge, ...]

    def node_weight(self, group_id: int) -> int:
        return len(self.groups[group_id].members)


def _earliest_contact(
    group: AtomicGroup, shared: frozenset[str], contacts: ContactGraph
) -> int | None:
    """Earliest contact start among the transferring passengers on ``group``'s trip.

    A single transferring passenger is measured against the other members of
    the group instead; ``None`` when the group has nobody else.
    """
    if len(shared) >= 2:
        pairs = combinations(sorted(shared), 2)
    else:
        (p0,) = shared
        pairs = ((p0, p) for p in group.members if p != p0)
    best = None
    for p, q in pairs:
        edge = contacts.contact(group.trip_id, p, q)
        if edge is None:
            raise ValueError(
                f"group {group.group_id} is not a clique of the contact graph on {group.trip_id}"
            )
        if best is None or edge.contact_start < best:
            best = edge.contact_start
    return best


def _boarding(group: AtomicGroup, shared: frozenset[str], contacts: ContactGraph) -> int:
    try:
        return min(contacts.leg_index[(p, group.trip_id)].board_time for p in shared)
    except KeyError:
        raise ValueError("contact graph carries no legs; cannot order singleton transfers") from None


def _points_forward(
    a: AtomicGroup,
    b: AtomicGroup,
    shared: frozenset[str],
    contacts: ContactGraph,
    start_times: Mapping[str, int],
) -> bool:
    """True when the transfer runs from ``a``'s trip to ``b``'s trip."""
    ta = _earliest_contact(a, shared, contacts)
    tb = _earliest_contact(b, shared, contacts)
    if ta is None or tb is None:
        ta, tb = _boarding(a, shared, contacts), _boarding(b, shared, contacts)
    if ta != tb:
        return ta < tb
    sa, sb = start_times.get(a.trip_id), start_times.get(b.trip_id)
    if sa is not None and sb is not None and sa != sb:
        return sa < sb
    return a.trip_id < b.trip_id


def build_transfer_graph(
    groups: Sequence[AtomicGroup],
    contacts: ContactGraph,
    trips: Iterable[TripMeta] = (),
) -> TransferGraph:
    """Connect groups on different trips that share passengers.

    Edge direction follows the earliest contact start of the shared passengers
    on each trip; see ``_points_forward`` for the fallbacks on singleton
    groups and exact ties.
    """
    by_id = {g.group_id: g for g in groups}
    start_times = {t.trip_id: t.start_time for t in trips}
    by_passenger: dict[str, list[int]] = defaultdict(list)
    for g in groups:
        for p in g.members:
            by_passenger[p].append(g.group_id)

    candidates: set[tuple[int, int]] = set()
    for gids in by_passenger.values():
        for i, j in combinations(sorted(gids), 2):
            if by_id[i].trip_id != by_id[j].trip_id:
                candidates.add((i, j))

    edges = []
    for i, j in sorted(candidates):
        a, b = by_id[i], by_id[j]
        shared = a.members & b.members
        if not _points_forward(a, b, shared, contacts, start_times):
            a, b = b, a
        edges.append(TransferEdge(a.group_id, b.group_id, a.trip_id, b.trip_id, len(shared), shared))
    return TransferGraph(by_id, tuple(edges))


def _score_key(s: TripPairScore) -> tuple[int, str, str]:
    return (-s.m, s.trip_i, s.trip_j)


def score_trip_pairs(graph: TransferGraph) -> list[TripPairScore]:
    """Sum transfer-edge weights per unordered trip pair, highest traffic first.

    This counts group structure rather than distinct people: a passenger who
    sits in two overlapping cliques on one trip is counted once per edge.
    """
    totals: dict[tuple[str, str], int] = defaultdict(int)
    for e in graph.edges:
        key = (e.source_trip, e.target_trip) if e.source_trip < e.target_trip else (e.target_trip, e.source_trip)
        totals[key] += e.weight
    scores = [TripPairScore(ti, tj, m) for (ti, tj), m in totals.items()]
    scores.sort(key=_score_key)
    return scores


def top_k_pairs(scores: Iterable[TripPairScore], k: int) -> list[tuple[str, str, int]]:
    if k < 1:
        raise ValueError("k must be at least 1")
    ranked = sorted(scores, key=_score_key)
    return [(s.trip_i, s.trip_j, s.m) for s in ranked[:k]]


def write_transfers(graph: TransferGraph, path: str | Path) -> None:
    with atomic_writer(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRANSFER_HEADER)
        for e in graph.edges:
            w.writerow((e.source, e.target, e.source_trip, e.target_trip, e.weight))


def write_pair_scores(scores: Iterable[TripPairScore], path: str | Path) -> None:
    with atomic_writer(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PAIR_HEADER)
        w.writerows(scores)
