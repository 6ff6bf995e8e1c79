"""Command line entry point: ``transitmesh <subcommand> ...``.

Exit codes: 0 success, 1 I/O failure, 2 invalid input or configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path
from typing import Sequence

from ._io import atomic_writer
from .cliques import enumerate_all, read_groups, write_groups
from .community_net import (
    build_community_graph,
    extract_communities,
    read_community_edges,
    write_communities,
    write_community_edges,
)
from .contact_net import build_contact_graph, prune, read_contacts, write_contacts
from .epidemic import SiConfig, assign_weights, run_si, write_risk_report
from .ingest import SyntheticConfig, generate_synthetic, load_trajectories, write_trajectories
from .transfer_net import (
    build_transfer_graph,
    score_trip_pairs,
    top_k_pairs,
    write_pair_scores,
    write_transfers,
)

log = logging.getLogger("transitmesh")

EXIT_IO = 1
EXIT_INVALID = 2


def _workers() -> int:
    cpus = os.cpu_count() or 1
    env = os.environ.get("TRANSITMESH_THREADS")
    if env:
        try:
            return max(1, min(cpus, int(env)))
        except ValueError:
            raise ValueError(f"TRANSITMESH_THREADS must be an integer, got {env!r}") from None
    return cpus


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {value}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _probability(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {value}")
    return value


def _add_si_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--iterations", type=_positive, default=5)
    p.add_argument("--replicates", type=_positive, default=10_000)
    p.add_argument("--seeds", type=_positive, default=100, help="initially infected passengers")
    p.add_argument("--rng-seed", type=_non_negative, default=0)
    p.add_argument("--per-passenger", action="store_true",
                   help="include per-passenger likelihoods in the risk report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="transitmesh", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic trajectories/trips pair")
    p.add_argument("--passengers", type=_positive, default=1000)
    p.add_argument("--trips", type=_positive, default=100)
    p.add_argument("--transfer-prob", type=_probability, default=0.5)
    p.add_argument("--seed", type=_non_negative, default=0)
    p.add_argument("--out", type=Path, default=Path("."))

    p = sub.add_parser("pipeline", help="run every stage and write all artifacts")
    p.add_argument("--input", type=Path, required=True, help="trajectories CSV")
    p.add_argument("--trips", type=Path, required=True, help="trips CSV")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--tau", type=_non_negative, nargs="+", default=[0, 5, 15, 30])
    p.add_argument("--top-k", type=_positive, default=5)
    p.add_argument("--min-strength", type=_non_negative, default=5)
    p.add_argument("--min-degree", type=_non_negative, default=2)
    p.add_argument("--raw-clique-benchmark", action="store_true",
                   help="also time clique enumeration on the unpartitioned graph")
    _add_si_flags(p)

    p = sub.add_parser("contact", help="build (and prune) the contact network")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--trips", type=Path, required=True)
    p.add_argument("--tau", type=_non_negative, default=0)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("cliques", help="enumerate atomic groups from a contacts CSV")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--trips", type=Path, required=True)
    p.add_argument("--contacts", type=Path, required=True)
    p.add_argument("--tau", type=_non_negative, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--raw-clique-benchmark", action="store_true")

    p = sub.add_parser("transfer", help="build the transfer network and trip-pair scores")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--trips", type=Path, required=True)
    p.add_argument("--contacts", type=Path, required=True)
    p.add_argument("--groups", type=Path, required=True)
    p.add_argument("--tau", type=_non_negative, default=0)
    p.add_argument("--top-k", type=_positive, default=5)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("community", help="build the community network and extract communities")
    p.add_argument("--groups", type=Path, required=True)
    p.add_argument("--tau", type=_non_negative, default=0)
    p.add_argument("--min-strength", type=_non_negative, default=5)
    p.add_argument("--min-degree", type=_non_negative, default=2)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("epidemic", help="SI simulation and vehicle-trip risk ranking")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--trips", type=Path, required=True)
    p.add_argument("--contacts", type=Path, required=True)
    p.add_argument("--community", type=Path, required=True, help="community edges CSV")
    p.add_argument("--out", type=Path, required=True)
    _add_si_flags(p)
    return parser


def _si_config(args: argparse.Namespace) -> SiConfig:
    return SiConfig(args.iterations, args.replicates, args.seeds, args.rng_seed)


def cmd_generate(args: argparse.Namespace) -> None:
    config = SyntheticConfig(args.passengers, args.trips, args.transfer_prob, rng_seed=args.seed)
    legs, trips = generate_synthetic(config)
    write_trajectories(legs, trips, args.out / "trajectories.csv", args.out / "trips.csv")
    log.info("wrote %d legs over %d trips to %s", len(legs), len(trips), args.out)


def _stage_row(tau: int, graph, groups, timing, transfers, scores, community, comps, top) -> dict:
    edges_per_trip: dict[str, int] = {}
    for e in graph.edges:
        edges_per_trip[e.trip_id] = edges_per_trip.get(e.trip_id, 0) + 1
    return {
        # Graph / Passengers / Edges / Trips / Time raw / Time partitioned
        "graph": f"G{tau}",
        "passengers": len(graph.nodes),
        "edges": len(graph.edges),
        "trips": len(edges_per_trip),
        "time_raw_s": timing.raw_s,
        "time_partitioned_s": timing.partitioned_s,
        "tau": tau,
        "edges_per_trip_sum": sum(edges_per_trip.values()),
        "groups": len(groups),
        "transfer_edges": len(transfers.edges),
        "trip_pairs": len(scores),
        "top_pairs": [list(t) for t in top],
        "community_nodes": len(community.nodes),
        "community_edges": len(community.strengths),
        "communities": len(comps),
        "raw_clique_count": timing.raw_clique_count,
    }


def cmd_pipeline(args: argparse.Namespace) -> None:
    taus = list(args.tau)
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise ValueError("--tau values must be strictly increasing")
    workers = _workers()
    started = time.perf_counter()
    legs, trips = load_trajectories(args.input, args.trips)
    base = build_contact_graph(legs)
    out: Path = args.out

    rows, artifacts = [], []
    epidemic_inputs = None
    for tau in taus:
        graph = prune(base, tau)
        groups, timing = enumerate_all(graph, benchmark_raw=args.raw_clique_benchmark, workers=workers)
        transfers = build_transfer_graph(groups, graph, trips)
        scores = score_trip_pairs(transfers)
        community = build_community_graph(groups)
        comps = extract_communities(community, args.min_strength, args.min_degree)

        names = {
            "contacts": f"contacts_tau{tau}.csv",
            "groups": f"groups_tau{tau}.csv",
            "transfers": f"transfers_tau{tau}.csv",
            "pair_scores": f"pair_scores_tau{tau}.csv",
            "community_edges": f"community_tau{tau}.csv",
            "communities": f"communities_tau{tau}.json",
        }
        write_contacts(graph, out / names["contacts"])
        write_groups(groups, out / names["groups"])
        write_transfers(transfers, out / names["transfers"])
        write_pair_scores(scores, out / names["pair_scores"])
        write_community_edges(community, out / names["community_edges"])
        write_communities(comps, out / names["communities"])
        artifacts.extend(names.values())

        rows.append(_stage_row(tau, graph, groups, timing, transfers, scores, community, comps,
                               top_k_pairs(scores, args.top_k)))
        log.info("tau=%d: %d passengers, %d contacts, %d groups", tau,
                 len(graph.nodes), len(graph.edges), len(groups))
        if epidemic_inputs is None:
            epidemic_inputs = (tau, graph, community)

    tau0, graph0, community0 = epidemic_inputs
    weights = assign_weights(graph0, community0)
    t0 = time.perf_counter()
    report = run_si(graph0, weights, _si_config(args), workers=workers)
    si_seconds = time.perf_counter() - t0
    write_risk_report(report, trips, out / "risk_report.json", per_passenger=args.per_passenger)
    artifacts.append("risk_report.json")

    manifest = {
        "inputs": {"trajectories": str(args.input), "trips_file": str(args.trips),
                   "legs": len(legs), "trips": len(trips)},
        "parameters": {"tau": taus, "top_k": args.top_k, "min_strength": args.min_strength,
                       "min_degree": args.min_degree, "workers": workers},
        "graphs": rows,
        "epidemic": {"tau": tau0, "passengers": len(graph0.nodes), "seconds": si_seconds,
                     "ranked_trips": len(report.trip_scores)},
        "artifacts": artifacts,
        "total_seconds": time.perf_counter() - started,
    }
    with atomic_writer(out / "manifest.json") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")


def cmd_contact(args: argparse.Namespace) -> None:
    legs, _ = load_trajectories(args.input, args.trips)
    graph = prune(build_contact_graph(legs), args.tau)
    write_contacts(graph, args.out / f"contacts_tau{args.tau}.csv")


def cmd_cliques(args: argparse.Namespace) -> None:
    legs, _ = load_trajectories(args.input, args.trips)
    graph = read_contacts(args.contacts, legs, args.tau)
    groups, timing = enumerate_all(graph, benchmark_raw=args.raw_clique_benchmark, workers=_workers())
    write_groups(groups, args.out / f"groups_tau{args.tau}.csv")
    log.info("partitioned %.3fs raw %s", timing.partitioned_s, timing.raw_s)


def cmd_transfer(args: argparse.Namespace) -> None:
    legs, trips = load_trajectories(args.input, args.trips)
    graph = read_contacts(args.contacts, legs, args.tau)
    transfers = build_transfer_graph(read_groups(args.groups), graph, trips)
    scores = score_trip_pairs(transfers)
    write_transfers(transfers, args.out / f"transfers_tau{args.tau}.csv")
    write_pair_scores(scores, args.out / f"pair_scores_tau{args.tau}.csv")
    for ti, tj, m in top_k_pairs(scores, args.top_k):
        print(f"{ti},{tj},{m}")


def cmd_community(args: argparse.Namespace) -> None:
    community = build_community_graph(read_groups(args.groups))
    write_community_edges(community, args.out / f"community_tau{args.tau}.csv")
    comps = extract_communities(community, args.min_strength, args.min_degree)
    write_communities(comps, args.out / f"communities_tau{args.tau}.json")


def cmd_epidemic(args: argparse.Namespace) -> None:
    legs, trips = load_trajectories(args.input, args.trips)
    graph = read_contacts(args.contacts, legs)
    weights = assign_weights(graph, read_community_edges(args.community))
    report = run_si(graph, weights, _si_config(args), workers=_workers())
    write_risk_report(report, trips, args.out / "risk_report.json", per_passenger=args.per_passenger)


COMMANDS = {
    "generate": cmd_generate,
    "pipeline": cmd_pipeline,
    "contact": cmd_contact,
    "cliques": cmd_cliques,
    "transfer": cmd_transfer,
    "community": cmd_community,
    "epidemic": cmd_epidemic,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"transitmesh {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"transitmesh {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
