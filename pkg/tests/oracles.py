"""Slow, obviously-correct reference computations used only by the tests."""

from __future__ import annotations

from collections import defaultdict
from itertools import combinations, product

from transitmesh.ingest import TrajectoryLeg


def overlap_minutes(a: TrajectoryLeg, b: TrajectoryLeg) -> int:
    return min(a.alight_time, b.alight_time) - max(a.board_time, b.board_time)


def trip_pairs(legs, tau=0):
    """Pairs of passengers whose intervals on the same trip overlap >= max(tau, 1)."""
    need = max(tau, 1)
    return {
        tuple(sorted((a.passenger_id, b.passenger_id)))
        for a, b in combinations(legs, 2)
        if overlap_minutes(a, b) >= need
    }


def brute_force_cliques(nodes, pairs):
    """Maximal cliques by checking every subset (fine for <= 15 nodes)."""
    nodes = sorted(nodes)
    edges = {frozenset(p) for p in pairs}

    def complete(sub):
        return all(frozenset(p) in edges for p in combinations(sub, 2))

    cliques = []
    for r in range(len(nodes), 0, -1):
        for sub in combinations(nodes, r):
            s = frozenset(sub)
            if any(s < c for c in cliques):
                continue
            if complete(sub):
                cliques.append(s)
    return set(cliques)


def flood_fill_components(nodes, edges):
    adj = defaultdict(set)
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    seen, comps = set(), []
    for n in sorted(nodes):
        if n in seen:
            continue
        comp, frontier = set(), [n]
        while frontier:
            x = frontier.pop()
            if x in comp:
                continue
            comp.add(x)
            frontier.extend(adj[x] - comp)
        seen |= comp
        comps.append(frozenset(comp))
    return set(comps)


def pair_scores_from_cliques(groups):
    """m_ij straight from clique lists: sum of shared-member counts over
    every pair of cliques on two different trips."""
    by_trip = defaultdict(list)
    for g in groups:
        by_trip[g.trip_id].append(g.members)
    totals = {}
    for ti, tj in combinations(sorted(by_trip), 2):
        m = sum(len(a & b) for a in by_trip[ti] for b in by_trip[tj])
        if m:
            totals[(ti, tj)] = m
    return totals


def exact_si(adj, prob, seeds, iterations):
    """Exact per-node infection probability after ``iterations`` synchronous
    rounds, by propagating the full distribution over infected sets."""
    dist = {frozenset(seeds): 1.0}
    for _ in range(iterations):
        nxt = defaultdict(float)
        for infected, p_state in dist.items():
            # per susceptible node, probability at least one infected neighbour succeeds
            targets = {}
            for v in adj:
                if v in infected:
                    continue
                miss = 1.0
                for u in adj[v]:
                    if u in infected:
                        miss *= 1.0 - prob[frozenset((u, v))]
                if miss < 1.0:
                    targets[v] = 1.0 - miss
            names = sorted(targets)
            for outcome in product((False, True), repeat=len(names)):
                p = p_state
                new = set(infected)
                for v, hit in zip(names, outcome):
                    p *= targets[v] if hit else 1.0 - targets[v]
                    if hit:
                        new.add(v)
                if p:
                    nxt[frozenset(new)] += p
        dist = nxt
    out = dict.fromkeys(adj, 0.0)
    for infected, p in dist.items():
        for v in infected:
            out[v] += p
    return out


def bfs_within(adj, seeds, hops):
    reached = set(seeds)
    frontier = set(seeds)
    for _ in range(hops):
        frontier = {m for n in frontier for m in adj[n]} - reached
        reached |= frontier
    return reached


def _csv_rows(path):
    import csv

    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def recount_stage(out, tau, top_k=5):
    """Manifest row fields recomputed straight from one tau's emitted files."""
    import json

    contacts = _csv_rows(out / f"contacts_tau{tau}.csv")
    community = _csv_rows(out / f"community_tau{tau}.csv")
    scores = _csv_rows(out / f"pair_scores_tau{tau}.csv")
    return {
        "passengers": len({r["u"] for r in contacts} | {r["v"] for r in contacts}),
        "edges": len(contacts),
        "trips": len({r["trip_id"] for r in contacts}),
        "edges_per_trip_sum": len(contacts),
        "groups": len(_csv_rows(out / f"groups_tau{tau}.csv")),
        "transfer_edges": len(_csv_rows(out / f"transfers_tau{tau}.csv")),
        "trip_pairs": len(scores),
        "top_pairs": [[r["trip_i"], r["trip_j"], int(r["m"])] for r in scores[:top_k]],
        "community_nodes": len({r["u"] for r in community} | {r["v"] for r in community}),
        "community_edges": len(community),
        "communities": len(json.loads((out / f"communities_tau{tau}.json").read_text())),
    }


def check_manifest(out, trajectories, trips, top_k=5):
    """Raise AssertionError if any manifest count disagrees with a recount."""
    import json

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["inputs"]["legs"] == len(_csv_rows(trajectories))
    assert manifest["inputs"]["trips"] == len(_csv_rows(trips))
    for row in manifest["graphs"]:
        expected = recount_stage(out, row["tau"], top_k)
        assert {k: row[k] for k in expected} == expected, row["graph"]
    report = json.loads((out / "risk_report.json").read_text())
    assert manifest["epidemic"]["ranked_trips"] == len(report["per_trip"])
    for name in manifest["artifacts"]:
        assert (out / name).is_file(), name
    return manifest
