"""Deterministic cloud-to-edge placement simulator.

Builds fog/cloud topologies, generates microservice workloads, places
services under four heuristics and two ordering modes, replays traffic
through an event-driven latency simulator, and aggregates the results into
reproducible CSV reports.
"""

from .communities import Community, louvain_communities
from .errors import (
    ConfigurationError,
    IncompletePlanError,
    MissingDataError,
    TopologyError,
)
from .experiment import (
    ExperimentConfig,
    ExperimentReport,
    derive_seed,
    parse_config_text,
    run_experiment,
    run_seed,
)
from .metrics import (
    ComparisonVerdict,
    GroupSummary,
    RunResult,
    aggregate,
    build_run_result,
    compare_modes,
    used_node_percentage,
)
from .placement import (
    OrderingMode,
    PlacementPlan,
    STRATEGIES,
    STRATEGY_ORDER,
    greedy_fram_place,
    greedy_latency_place,
    near_gateway_place,
    order_services,
    rr_ipt_place,
)
from .simulation import Event, LatencySample, SimulationConfig, run_simulation
from .topology import (
    DistanceMetric,
    Link,
    Node,
    Topology,
    TopologyParams,
    compute_tiers,
    generate_topology,
    identify_gateways,
    link_latency,
)
from .workload import (
    App,
    Message,
    Service,
    UserSource,
    WorkloadParams,
    assign_users,
    avg_message_instructions,
    generate_apps,
    message_routing_sequence,
)

__version__ = "0.1.0"
