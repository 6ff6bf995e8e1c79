"""Per-trip partitioning and maximal clique enumeration.

Atomic passenger groups are the maximal cliques of each trip's contact
subgraph. Two enumerators are provided: Bron-Kerbosch on bitsets (the
production path) and an endpoint sweep that exploits the interval structure
of a single trip, used to cross-check the first.
"""

from __future__ import annotations

import csv
import heapq
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from ._io import atomic_writer
from .contact_net import ContactEdge, ContactGraph
from .ingest import TrajectoryLeg, ValidationError

GROUP_HEADER = ("group_id", "trip_id", "member_count", "members")


@dataclass(frozen=True)
class TripSubgraph:
    trip_id: str
    nodes: frozenset[str]
    edges: tuple[ContactEdge, ...]


@dataclass(frozen=True)
class AtomicGroup:
    group_id: int
    trip_id: str
    members: frozenset[str]

    @property
    def weight(self) -> int:
        return len(self.members)


@dataclass
class CliqueTiming:
    partitioned_s: float
    raw_s: float | None = None
    raw_clique_count: int | None = None

    @property
    def speedup(self) -> float | None:
        if self.raw_s is None or self.partitioned_s <= 0:
            return None
        return self.raw_s / self.partitioned_s


def partition(graph: ContactGraph) -> list[TripSubgraph]:
    """Split the contact graph into one subgraph per vehicle trip, ordered by trip id."""
    per_trip: dict[str, list[ContactEdge]] = {t: [] for t in graph.trip_ids}
    for e in graph.edges:
        per_trip[e.trip_id].append(e)
    rosters = graph.rosters
    return [TripSubgraph(t, rosters[t], tuple(per_trip[t])) for t in graph.trip_ids]


# -- Bron-Kerbosch ---------------------------------------------------------


def _iter_bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _degeneracy_order(adj: Sequence[int]) -> list[int]:
    deg = [a.bit_count() for a in adj]
    heap = [(d, v) for v, d in enumerate(deg)]
    heapq.heapify(heap)
    removed = [False] * len(adj)
    order = []
    while heap:
        d, v = heapq.heappop(heap)
        if removed[v] or d != deg[v]:
            continue
        removed[v] = True
        order.append(v)
        for w in _iter_bits(adj[v]):
            if not removed[w]:
                deg[w] -= 1
                heapq.heappush(heap, (deg[w], w))
    return order


def _expand(r: int, p: int, x: int, adj: Sequence[int], out: list[int]) -> None:
    if not p:
        if not x:
            out.append(r)
        return
    best, pivot_nbrs = -1, 0
    for u in _iter_bits(p | x):
        c = (p & adj[u]).bit_count()
        if c > best:
            best, pivot_nbrs = c, adj[u]
    for v in _iter_bits(p & ~pivot_nbrs):
        bit = 1 << v
        _expand(r | bit, p & adj[v], x & adj[v], adj, out)
        p &= ~bit
        x |= bit


def _bk_masks(adj: Sequence[int]) -> list[int]:
    out: list[int] = []
    done = 0
    for v in _degeneracy_order(adj):
        bit = 1 << v
        _expand(bit, adj[v] & ~done, adj[v] & done, adj, out)
        done |= bit
    return out


def maximal_cliques(
    nodes: Iterable[str], pairs: Iterable[tuple[str, str]]
) -> list[frozenset[str]]:
    """All maximal cliques of a simple graph, in canonical (sorted-member) order.

    Isolated nodes come back as singleton cliques.
    """
    pairs = list(pairs)
    names = sorted(set(nodes).union(p for e in pairs for p in e))
    index = {n: i for i, n in enumerate(names)}
    adj = [0] * len(names)
    for a, b in pairs:
        if a == b:
            continue
        i, j = index[a], index[b]
        adj[i] |= 1 << j
        adj[j] |= 1 << i
    cliques = [tuple(names[i] for i in _iter_bits(m)) for m in _bk_masks(adj)]
    cliques.sort()
    return [frozenset(c) for c in cliques]


def bron_kerbosch(sub: TripSubgraph, first_id: int = 0) -> list[AtomicGroup]:
    cliques = maximal_cliques(sub.nodes, [(e.u, e.v) for e in sub.edges])
    return [AtomicGroup(first_id + i, sub.trip_id, c) for i, c in enumerate(cliques)]


# -- interval sweep --------------------------------------------------------


def interval_cliques(
    legs: Sequence[TrajectoryLeg], tau: int = 0, first_id: int = 0
) -> list[AtomicGroup]:
    """Maximal cliques of one trip by sweeping interval endpoints.

    With integer minutes, "overlap of at least tau" between [a, b) and [c, d)
    is the same as positive overlap once every right end is pulled in by
    ``max(tau, 1) - 1``, so the thresholded trip graph is itself an interval
    graph and the sweep is exact for every tau. Legs too short to reach the
    threshold with anybody become singletons.
    """
    if not legs:
        return []
    trip_ids = {leg.trip_id for leg in legs}
    if len(trip_ids) != 1:
        raise ValueError("interval_cliques expects legs of a single trip")
    (trip_id,) = trip_ids
    shrink = max(tau, 1) - 1

    cliques: list[tuple[str, ...]] = []
    events = []
    for leg in legs:
        end = leg.alight_time - shrink
        if end <= leg.board_time:
            cliques.append((leg.passenger_id,))
            continue
        # ends sort before starts at the same minute: touching is not overlap
        events.append((leg.board_time, 1, leg.passenger_id))
        events.append((end, 0, leg.passenger_id))
    events.sort()
    active: set[str] = set()
    grown = False
    for _, is_start, pid in events:
        if is_start:
            active.add(pid)
            grown = True
        else:
            if grown:
                cliques.append(tuple(sorted(active)))
                grown = False
            active.discard(pid)
    cliques.sort()
    return [AtomicGroup(first_id + i, trip_id, frozenset(c)) for i, c in enumerate(cliques)]


# -- whole-graph driver ----------------------------------------------------


def _enumerate_chunk(subs: list[TripSubgraph]) -> list[list[frozenset[str]]]:
    return [maximal_cliques(s.nodes, [(e.u, e.v) for e in s.edges]) for s in subs]


def raw_cliques(graph: ContactGraph) -> list[frozenset[str]]:
    """Maximal cliques of the whole contact graph with trips ignored."""
    return maximal_cliques(graph.nodes, list(graph.pairs()))


def enumerate_all(
    graph: ContactGraph, *, benchmark_raw: bool = False, workers: int = 1
) -> tuple[list[AtomicGroup], CliqueTiming]:
    """Atomic groups of every trip, numbered densely in trip order.

    With ``benchmark_raw`` the unpartitioned graph is enumerated too, purely
    to record its wall time next to the partitioned one.
    """
    t0 = time.perf_counter()
    subs = partition(graph)
    if workers > 1 and len(subs) > 1:
        n = min(workers, len(subs))
        chunks = [subs[i::n] for i in range(n)]
        with ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(_enumerate_chunk, chunks))
        by_trip = {}
        for chunk, res in zip(chunks, results):
            for s, cl in zip(chunk, res):
                by_trip[s.trip_id] = cl
        per_trip = [by_trip[s.trip_id] for s in subs]
    else:
        per_trip = _enumerate_chunk(subs)
    groups = []
    for sub, cliques in zip(subs, per_trip):
        for c in cliques:
            groups.append(AtomicGroup(len(groups), sub.trip_id, c))
    timing = CliqueTiming(time.perf_counter() - t0)

    if benchmark_raw:
        t0 = time.perf_counter()
        raw = raw_cliques(graph)
        timing.raw_s = time.perf_counter() - t0
        timing.raw_clique_count = len(raw)
    return groups, timing


def write_groups(groups: Iterable[AtomicGroup], path: str | Path) -> None:
    with atomic_writer(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GROUP_HEADER)
        for g in groups:
            w.writerow((g.group_id, g.trip_id, len(g.members), ";".join(sorted(g.members))))


def read_groups(path: str | Path) -> list[AtomicGroup]:
    path = Path(path)
    groups = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if tuple(next(reader, ())) != GROUP_HEADER:
            raise ValidationError(f"expected header {','.join(GROUP_HEADER)}", 1, str(path))
        for row in reader:
            if not row:
                continue
            try:
                gid, trip_id, count, members = row
                group = AtomicGroup(int(gid), trip_id, frozenset(members.split(";")))
                if len(group.members) != int(count):
                    raise ValueError
            except ValueError:
                raise ValidationError("malformed group row", reader.line_num, str(path)) from None
            groups.append(group)
    return groups
