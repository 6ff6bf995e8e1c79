"""SI spreading over the contact network and vehicle-trip risk ranking.

Transmission probabilities come from connection strength where a pair is in
the community network, and from a flat base probability otherwise.
Replicates are simulated in fixed-size chunks, each with its own RNG stream
derived from ``(rng_seed, chunk index)``; results do not depend on the
number of workers.
"""

from __future__ import annotations

import json
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._io import atomic_writer
from .community_net import CommunityGraph
from .contact_net import ContactGraph
from .ingest import TrajectoryLeg, TripMeta

# Upper bound on the (replicates x directed edges) attempt matrix per chunk.
_CHUNK_CELLS = 20_000_000
_MAX_CHUNK = 1000


class StructuralError(ValueError):
    """Community network is not derived from the given contact network."""


@dataclass(frozen=True)
class TransmissionWeights:
    probs: dict[tuple[str, str], float]
    cap: int = 100
    lo: float = 0.1
    hi: float = 0.8
    base_prob: float = 0.05

    def prob(self, u: str, v: str) -> float:
        if v < u:
            u, v = v, u
        return self.probs[(u, v)]


@dataclass(frozen=True)
class SiConfig:
    iterations: int = 5
    replicates: int = 10_000
    seed_count: int = 100
    rng_seed: int = 0
    fixed_seeds: tuple[str, ...] | None = None

    def validate(self) -> None:
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if self.replicates < 1:
            raise ValueError("replicates must be positive")
        if self.seed_count < 1:
            raise ValueError("seed_count must be positive")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be unsigned")


@dataclass
class RiskReport:
    config: SiConfig
    likelihood: dict[str, float]
    trip_scores: list[tuple[str, float]] = field(default_factory=list)


def assign_weights(
    contacts: ContactGraph,
    community: CommunityGraph,
    *,
    cap: int = 100,
    lo: float = 0.1,
    hi: float = 0.8,
    base_prob: float = 0.05,
    zero_min: bool = False,
) -> TransmissionWeights:
    """One transmission probability per passenger pair in contact.

    Strengths are capped at ``cap`` and min-max scaled into ``[lo, hi]``;
    ``zero_min`` pins the bottom of the range at 0 instead of the observed
    minimum.
    """
    pairs = contacts.pairs()
    missing = [p for p in community.strengths if p not in pairs]
    if missing:
        raise StructuralError(f"community pair {missing[0]} has no contact edge")
    probs = dict.fromkeys(sorted(pairs), base_prob)
    if community.strengths:
        capped = {p: min(s, cap) for p, s in community.strengths.items()}
        s_min = 0 if zero_min else min(capped.values())
        s_max = max(capped.values())
        for p, s in capped.items():
            if s_max == s_min:
                probs[p] = lo
            else:
                probs[p] = lo + (s - s_min) * (hi - lo) / (s_max - s_min)
    return TransmissionWeights(probs, cap, lo, hi, base_prob)


def _simulate_chunk(
    n_nodes: int,
    src: np.ndarray,
    dst: np.ndarray,
    prob: np.ndarray,
    reps: int,
    iterations: int,
    rng: np.random.Generator,
    seed_count: int = 0,
    fixed: np.ndarray | None = None,
    history: list[np.ndarray] | None = None,
) -> np.ndarray:
    """Run ``reps`` replicates; return the per-node count of infected endings.

    State is a nodes x replicates boolean matrix; ``history`` (if given)
    receives a copy of it before the first round and after every round.
    """
    infected = np.zeros((n_nodes, reps), dtype=bool)
    if fixed is not None:
        infected[fixed, :] = True
    else:
        for r in range(reps):
            infected[rng.choice(n_nodes, size=seed_count, replace=False), r] = True
    if history is not None:
        history.append(infected.copy())
    for _ in range(iterations):
        flat = np.flatnonzero(infected[src] & ~infected[dst])
        edge, rep = np.divmod(flat, reps)
        hit = rng.random(flat.size) < prob[edge]
        infected[dst[edge[hit]], rep[hit]] = True
        if history is not None:
            history.append(infected.copy())
    return infected.sum(axis=1)


def run_si(
    contacts: ContactGraph,
    weights: TransmissionWeights,
    config: SiConfig,
    workers: int = 1,
) -> RiskReport:
    """Monte-Carlo SI with synchronous rounds.

    Each replicate draws a fresh set of ``seed_count`` initially infected
    passengers (or uses ``config.fixed_seeds``). In every round each infected
    passenger tries each susceptible neighbour once; new infections only
    start spreading in the following round.
    """
    config.validate()
    nodes = sorted(contacts.nodes)
    index = {n: i for i, n in enumerate(nodes)}
    fixed = None
    if config.fixed_seeds is not None:
        unknown = [s for s in config.fixed_seeds if s not in index]
        if unknown:
            raise ValueError(f"fixed seed {unknown[0]!r} is not in the contact network")
        fixed = np.array(sorted(index[s] for s in set(config.fixed_seeds)), dtype=np.int64)
    elif config.seed_count > len(nodes):
        raise ValueError(
            f"seed_count {config.seed_count} exceeds the {len(nodes)} passengers in the network"
        )

    pairs = sorted(contacts.pairs())
    try:
        p = np.array([weights.probs[pair] for pair in pairs], dtype=np.float64)
    except KeyError as exc:
        raise ValueError(f"no transmission probability for contact pair {exc.args[0]}") from None
    u = np.array([index[a] for a, _ in pairs], dtype=np.int64)
    v = np.array([index[b] for _, b in pairs], dtype=np.int64)
    src, dst, prob = np.concatenate([u, v]), np.concatenate([v, u]), np.concatenate([p, p])

    chunk = max(1, min(_MAX_CHUNK, _CHUNK_CELLS // max(1, src.size)))
    spans = [(i, min(chunk, config.replicates - i * chunk))
             for i in range(-(-config.replicates // chunk))]

    def work(span: tuple[int, int]) -> np.ndarray:
        idx, reps = span
        rng = np.random.default_rng([config.rng_seed, idx])
        return _simulate_chunk(len(nodes), src, dst, prob, reps, config.iterations, rng,
                               config.seed_count, fixed)

    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(work, spans))
    else:
        counts = [work(s) for s in spans]
    total = np.sum(counts, axis=0) if counts else np.zeros(len(nodes))
    likelihood = {n: float(c) / config.replicates for n, c in zip(nodes, total)}
    return RiskReport(config, likelihood, rank_trips(likelihood, contacts.legs))


def rank_trips(
    likelihood: Mapping[str, float],
    legs: Iterable[TrajectoryLeg],
    trips: Iterable[TripMeta] = (),
) -> list[tuple[str, float]]:
    """Trip risk = sum of infection likelihoods of its riders, riskiest first."""
    scores: dict[str, float] = defaultdict(float)
    for t in trips:
        scores[t.trip_id] += 0.0
    for leg in legs:
        scores[leg.trip_id] += likelihood.get(leg.passenger_id, 0.0)
    return sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))


def write_risk_report(
    report: RiskReport,
    trips: Sequence[TripMeta],
    path: str | Path,
    per_passenger: bool = False,
) -> None:
    meta = {t.trip_id: t for t in trips}
    per_trip = []
    for rank, (trip_id, score) in enumerate(report.trip_scores, start=1):
        t = meta.get(trip_id)
        per_trip.append({
            "trip_id": trip_id,
            "route_id": t.route_id if t else None,
            "start_time": t.start_time if t else None,
            "score": score,
            "rank": rank,
        })
    config = asdict(report.config)
    if config["fixed_seeds"] is not None:
        config["fixed_seeds"] = list(config["fixed_seeds"])
    payload: dict = {"config": config, "per_trip": per_trip}
    if per_passenger:
        payload["per_passenger"] = dict(sorted(report.likelihood.items()))
    with atomic_writer(path) as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
