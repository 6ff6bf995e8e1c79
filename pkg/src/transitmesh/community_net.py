"""Passenger community network weighted by connection strength.

Connection strength between two passengers counts the pairs of shared
atomic groups that sit on different trips: riding together again on another
vehicle adds to it, while several overlapping cliques on one vehicle add
nothing.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict, deque
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ._io import atomic_writer
from .cliques import AtomicGroup
from .ingest import ValidationError
from .transfer_net import TransferGraph

EDGE_HEADER = ("u", "v", "strength")


@dataclass(frozen=True)
class CoMembership:
    """How many cliques of each trip contain both ``u`` and ``v``."""

    u: str
    v: str
    per_trip: Mapping[str, int] = field(default_factory=dict)

    @property
    def g_total(self) -> int:
        return sum(self.per_trip.values())

    @property
    def trips(self) -> frozenset[str]:
        return frozenset(self.per_trip)


@dataclass(frozen=True)
class CommunityGraph:
    nodes: frozenset[str]
    strengths: dict[tuple[str, str], int]

    def adjacency(self, min_strength: int = 0) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {n: set() for n in self.nodes}
        for (u, v), s in self.strengths.items():
            if s >= min_strength:
                adj[u].add(v)
                adj[v].add(u)
        return adj

    def strength(self, u: str, v: str) -> int:
        if v < u:
            u, v = v, u
        return self.strengths.get((u, v), 0)


def connection_strength(cm: CoMembership) -> int:
    g = cm.g_total
    return g * (g - 1) // 2 - sum(n * (n - 1) // 2 for n in cm.per_trip.values())


def co_memberships(groups: Iterable[AtomicGroup]) -> dict[tuple[str, str], CoMembership]:
    tallies: dict[tuple[str, str], dict[str, int]] = defaultdict(lambda: defaultdict(int))
    for g in groups:
        for u, v in combinations(sorted(g.members), 2):
            tallies[(u, v)][g.trip_id] += 1
    return {pair: CoMembership(pair[0], pair[1], dict(t)) for pair, t in tallies.items()}


def _graph_from_strengths(strengths: dict[tuple[str, str], int]) -> CommunityGraph:
    strengths = {pair: s for pair, s in sorted(strengths.items()) if s > 0}
    nodes = frozenset(p for pair in strengths for p in pair)
    return CommunityGraph(nodes, strengths)


def build_community_graph(groups: Sequence[AtomicGroup]) -> CommunityGraph:
    strengths = {
        pair: connection_strength(cm)
        for pair, cm in co_memberships(groups).items()
        if len(cm.per_trip) >= 2
    }
    return _graph_from_strengths(strengths)


def community_graph_from_transfers(transfers: TransferGraph) -> CommunityGraph:
    """Build the same network by counting, for every transfer edge, each
    passenger pair in its shared set once."""
    strengths: dict[tuple[str, str], int] = defaultdict(int)
    for e in transfers.edges:
        for pair in combinations(sorted(e.shared), 2):
            strengths[pair] += 1
    return _graph_from_strengths(dict(strengths))


def extract_communities(
    graph: CommunityGraph, min_strength: int = 0, min_degree: int = 0
) -> list[frozenset[str]]:
    """Connected components after dropping weak edges and peeling low-degree nodes.

    Peeling repeats until every remaining node has at least ``min_degree``
    neighbours. Components are returned largest first.
    """
    if min_strength < 0 or min_degree < 0:
        raise ValueError("min_strength and min_degree must be non-negative")
    adj = graph.adjacency(min_strength)
    queue = deque(n for n, nbrs in adj.items() if len(nbrs) < min_degree)
    while queue:
        n = queue.popleft()
        if n not in adj:
            continue
        for m in adj.pop(n):
            nbrs = adj[m]
            nbrs.discard(n)
            if len(nbrs) < min_degree:
                queue.append(m)

    components = []
    seen: set[str] = set()
    for start in sorted(adj):
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        while stack:
            for m in adj[stack.pop()]:
                if m not in comp:
                    comp.add(m)
                    stack.append(m)
        seen |= comp
        components.append(frozenset(comp))
    components.sort(key=lambda c: (-len(c), sorted(c)))
    return components


def write_community_edges(graph: CommunityGraph, path: str | Path) -> None:
    with atomic_writer(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EDGE_HEADER)
        for (u, v), s in graph.strengths.items():
            w.writerow((u, v, s))


def read_community_edges(path: str | Path) -> CommunityGraph:
    path = Path(path)
    strengths = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if tuple(next(reader, ())) != EDGE_HEADER:
            raise ValidationError(f"expected header {','.join(EDGE_HEADER)}", 1, str(path))
        for row in reader:
            if not row:
                continue
            try:
                u, v, s = row
                strengths[(u, v) if u < v else (v, u)] = int(s)
            except ValueError:
                raise ValidationError("malformed community row", reader.line_num, str(path)) from None
    return _graph_from_strengths(strengths)


def write_communities(components: Sequence[frozenset[str]], path: str | Path) -> None:
    payload = [
        {"component_id": i, "members": sorted(c), "size": len(c)}
        for i, c in enumerate(components)
    ]
    with atomic_writer(path) as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
