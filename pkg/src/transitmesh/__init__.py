"""Contact, transfer and community networks mined from transit trajectories."""

from .cliques import (
    AtomicGroup,
    CliqueTiming,
    TripSubgraph,
    bron_kerbosch,
    enumerate_all,
    interval_cliques,
    maximal_cliques,
    partition,
    raw_cliques,
)
from .community_net import (
    CommunityGraph,
    CoMembership,
    build_community_graph,
    community_graph_from_transfers,
    connection_strength,
    extract_communities,
)
from .contact_net import ContactEdge, ContactGraph, build_contact_graph, degree_distribution, prune
from .epidemic import (
    RiskReport,
    SiConfig,
    StructuralError,
    TransmissionWeights,
    assign_weights,
    rank_trips,
    run_si,
)
from .ingest import (
    SyntheticConfig,
    TrajectoryLeg,
    TripMeta,
    ValidationError,
    generate_synthetic,
    load_trajectories,
    validate,
    write_trajectories,
)
from .transfer_net import (
    TransferEdge,
    TransferGraph,
    TripPairScore,
    build_transfer_graph,
    score_trip_pairs,
    top_k_pairs,
)

__version__ = "0.1.0"
