"""Temporal passenger contact network.

Two passengers are in contact on a trip when their on-board intervals on that
trip overlap for a positive number of minutes. Each contact is one edge
carrying the trip id, the contact start and the contact duration, so a pair
riding two trips together has two parallel edges.
"""

from __future__ import annotations

import csv
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from ._io import atomic_writer
from .ingest import TrajectoryLeg, ValidationError

EDGE_HEADER = ("u", "v", "trip_id", "contact_start", "duration")


class ContactEdge(NamedTuple):
    u: str
    v: str
    trip_id: str
    contact_start: int
    duration: int


@dataclass(frozen=True, eq=False)
class ContactGraph:
    """Contact network, optionally pruned by a minimum contact duration.

    ``nodes`` holds the passengers with at least one surviving edge. ``legs``
    keeps the source legs so trip rosters and boarding times stay available
    after pruning.
    """

    nodes: frozenset[str]
    edges: tuple[ContactEdge, ...]
    threshold_tau: int = 0
    legs: tuple[TrajectoryLeg, ...] = field(default=(), repr=False)

    @cached_property
    def _by_key(self) -> dict[tuple[str, str, str], ContactEdge]:
        return {(e.trip_id, e.u, e.v): e for e in self.edges}

    def contact(self, trip_id: str, p: str, q: str) -> ContactEdge | None:
        """Edge between ``p`` and ``q`` on ``trip_id`` if it survived pruning."""
        if q < p:
            p, q = q, p
        return self._by_key.get((trip_id, p, q))

    @cached_property
    def rosters(self) -> dict[str, frozenset[str]]:
        """trip_id -> passengers with a leg on that trip."""
        out: dict[str, set[str]] = defaultdict(set)
        for leg in self.legs:
            out[leg.trip_id].add(leg.passenger_id)
        for e in self.edges:
            out[e.trip_id].update((e.u, e.v))
        return {t: frozenset(ps) for t, ps in out.items()}

    @cached_property
    def leg_index(self) -> dict[tuple[str, str], TrajectoryLeg]:
        return {(leg.passenger_id, leg.trip_id): leg for leg in self.legs}

    @cached_property
    def trip_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.rosters))

    def adjacency(self) -> dict[str, set[str]]:
        """Simple-graph view: parallel per-trip edges collapse to one neighbor."""
        adj: dict[str, set[str]] = {n: set() for n in self.nodes}
        for e in self.edges:
            adj[e.u].add(e.v)
            adj[e.v].add(e.u)
        return adj

    def pairs(self) -> set[tuple[str, str]]:
        return {(e.u, e.v) for e in self.edges}


def trip_contacts(legs: Sequence[TrajectoryLeg]) -> list[ContactEdge]:
    """Contacts among legs of a single trip, by a sweep over boarding times."""
    ordered = sorted(legs, key=lambda g: (g.board_time, g.passenger_id))
    out = []
    for i, a in enumerate(ordered):
        for b in ordered[i + 1 :]:
            if b.board_time >= a.alight_time:
                break
            start = b.board_time
            duration = min(a.alight_time, b.alight_time) - start
            if duration > 0:
                u, v = sorted((a.passenger_id, b.passenger_id))
                out.append(ContactEdge(u, v, a.trip_id, start, duration))
    return out


def legs_by_trip(legs: Iterable[TrajectoryLeg]) -> dict[str, list[TrajectoryLeg]]:
    by_trip: dict[str, list[TrajectoryLeg]] = defaultdict(list)
    for leg in legs:
        by_trip[leg.trip_id].append(leg)
    return by_trip


def build_contact_graph(legs: Sequence[TrajectoryLeg]) -> ContactGraph:
    edges: list[ContactEdge] = []
    for trip_id, group in sorted(legs_by_trip(legs).items()):
        edges.extend(trip_contacts(group))
    edges.sort(key=lambda e: (e.trip_id, e.u, e.v))
    nodes = frozenset(p for e in edges for p in (e.u, e.v))
    return ContactGraph(nodes, tuple(edges), 0, tuple(legs))


def prune(graph: ContactGraph, tau: int) -> ContactGraph:
    """Drop contacts shorter than ``tau`` minutes, then any passenger left without contacts."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    edges = tuple(e for e in graph.edges if e.duration >= tau)
    nodes = frozenset(p for e in edges for p in (e.u, e.v))
    return replace(graph, nodes=nodes, edges=edges, threshold_tau=tau)


def degree_distribution(graph: ContactGraph) -> dict[int, int]:
    hist = Counter(len(nbrs) for nbrs in graph.adjacency().values())
    return dict(sorted(hist.items()))


def write_contacts(graph: ContactGraph, path: str | Path) -> None:
    with atomic_writer(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EDGE_HEADER)
        w.writerows(graph.edges)


def read_contacts(
    path: str | Path, legs: Sequence[TrajectoryLeg] = (), tau: int = 0
) -> ContactGraph:
    path = Path(path)
    edges = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if tuple(next(reader, ())) != EDGE_HEADER:
            raise ValidationError(f"expected header {','.join(EDGE_HEADER)}", 1, str(path))
        for row in reader:
            if not row:
                continue
            try:
                u, v, trip_id, start, duration = row
                edge = ContactEdge(u, v, trip_id, int(start), int(duration))
            except ValueError:
                raise ValidationError("malformed contact row", reader.line_num, str(path)) from None
            if not u < v or edge.duration <= 0:
                raise ValidationError("contact row violates u < v or duration > 0",
                                      reader.line_num, str(path))
            edges.append(edge)
    nodes = frozenset(p for e in edges for p in (e.u, e.v))
    return ContactGraph(nodes, tuple(edges), tau, tuple(legs))
