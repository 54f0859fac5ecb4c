"""Service placement strategies and the two service-ordering modes.

All strategies consume an immutable topology and workload, keep a private
working copy of per-node free RAM, and return a total, deterministic
``PlacementPlan``. The cloud node (unbounded RAM) guarantees totality as a
last-resort host.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum

from .communities import louvain_communities
from .topology import DistanceMetric, Topology
from .workload import App, Service, avg_message_instructions, message_routing_sequence


class OrderingMode(Enum):
    APP_BASED = "app_based"
    SERVICE_BASED = "service_based"


@dataclass(frozen=True)
class PlacementPlan:
    """Total mapping of every (app, order) service onto a node."""

    assignments: dict[tuple[int, int], int]
    residual_ram: dict[int, float]

    def node_of(self, service: Service) -> int:
        return self.assignments[(service.app_id, service.order)]

    def used_nodes(self) -> set[int]:
        return set(self.assignments.values())

    def to_text(self) -> str:
        lines = ["[assignments]", "service node"]
        for (app_id, order) in sorted(self.assignments):
            lines.append(f"app{app_id}.s{order} {self.assignments[(app_id, order)]}")
        lines.append("[residual_ram]")
        lines.append("node free_ram")
        for nid in sorted(self.residual_ram):
            free = self.residual_ram[nid]
            lines.append(f"{nid} {'inf' if math.isinf(free) else repr(free)}")
        return "\n".join(lines) + "\n"


def _by_request_rate(apps) -> list[App]:
    # Descending request rate == ascending period; ties by app id.
    return sorted(apps, key=lambda a: (a.request_period, a.id))


def _chain(app: App) -> list[Service]:
    return sorted(app.services, key=lambda s: s.order)


def _sequence(sorted_apps, mode: OrderingMode) -> list[Service]:
    if mode is OrderingMode.APP_BASED:
        return [s for app in sorted_apps for s in _chain(app)]
    chains = [_chain(app) for app in sorted_apps]
    longest = max((len(c) for c in chains), default=0)
    out: list[Service] = []
    for k in range(longest):
        for chain in chains:
            if k < len(chain):
                out.append(chain[k])
    return out


def order_services(apps, mode: OrderingMode) -> list[Service]:
    """Flatten apps into one service sequence.

    Apps are taken in descending request-rate order. App-based mode keeps each
    app's chain contiguous; service-based mode round-robins one service per
    app per pass, skipping exhausted apps.
    """
    return _sequence(_by_request_rate(apps), mode)


def _initial_free(topology: Topology) -> dict[int, float]:
    return {nid: topology.nodes[nid].free_ram for nid in topology.node_ids}


def greedy_latency_place(topology: Topology, ordered_services) -> PlacementPlan:
    """First-fit over nodes sorted once by ascending average link latency.

    The cloud is appended last as the always-feasible fallback; the node
    order is never re-sorted while placing.
    """
    cloud = topology.cloud_id
    order = sorted(topology.fog_ids, key=lambda nid: (topology.avg_link_latency(nid), nid))
    order.append(cloud)
    free = _initial_free(topology)
    assignments: dict[tuple[int, int], int] = {}
    for service in ordered_services:
        for nid in order:
            if free[nid] >= service.ram_demand:
                free[nid] -= service.ram_demand
                assignments[(service.app_id, service.order)] = nid
                break
    return PlacementPlan(assignments=assignments, residual_ram=free)


def greedy_fram_place(topology: Topology, ordered_services) -> PlacementPlan:
    """Highest (tier, free RAM) node first, via a priority heap.

    Non-fitting nodes popped while searching are pushed back after the
    service is placed, so the heap always holds every fog node exactly once.
    A service that fits nowhere goes to the cloud.
    """
    free = _initial_free(topology)
    heap = [
        (-topology.nodes[nid].tier, -free[nid], nid)
        for nid in topology.fog_ids
    ]
    heapq.heapify(heap)
    cloud = topology.cloud_id
    assignments: dict[tuple[int, int], int] = {}
    for service in ordered_services:
        stash = []
        placed = None
        while heap:
            neg_tier, neg_free, nid = heapq.heappop(heap)
            if -neg_free >= service.ram_demand:
                free[nid] = -neg_free - service.ram_demand
                heapq.heappush(heap, (neg_tier, -free[nid], nid))
                placed = nid
                break
            stash.append((neg_tier, neg_free, nid))
        for entry in stash:
            heapq.heappush(heap, entry)
        if placed is None:
            placed = cloud
            free[cloud] -= service.ram_demand
        assignments[(service.app_id, service.order)] = placed
    return PlacementPlan(assignments=assignments, residual_ram=free)


def near_gateway_place(topology: Topology, apps, mode: OrderingMode,
                       metric: DistanceMetric) -> PlacementPlan:
    """Cluster each app around the gateway layer, chaining via parent nodes.

    The zero-order service lands on the feasible node with the smallest
    average distance to the gateways; every later service lands on the
    feasible node closest to its app's current parent (the parent itself
    qualifies at distance zero) and becomes the new parent. Service-based
    mode walks order-by-order across apps; app-based walks app-by-app.
    """
    sorted_apps = _by_request_rate(apps)
    routing = message_routing_sequence(apps)
    free = _initial_free(topology)
    assignments: dict[tuple[int, int], int] = {}
    parents: dict[int, int] = {}
    candidates = topology.node_ids

    def place(service: Service) -> None:
        parent = parents.get(service.app_id)
        best = None
        best_key = None
        for nid in candidates:
            if free[nid] < service.ram_demand:
                continue
            if parent is None:
                key = topology.avg_distance_to_gateways(nid, metric)
            else:
                key = topology.distance(nid, parent, metric)
            if best_key is None or key < best_key:
                best, best_key = nid, key
        free[best] -= service.ram_demand
        assignments[(service.app_id, service.order)] = best
        parents[service.app_id] = best

    if mode is OrderingMode.SERVICE_BASED:
        for order in sorted(routing):
            per_app = routing[order]
            for app in sorted_apps:
                for service in per_app.get(app.id, []):
                    place(service)
    else:
        for app in sorted_apps:
            for service in _chain(app):
                place(service)
    return PlacementPlan(assignments=assignments, residual_ram=free)


def rr_ipt_place(topology: Topology, apps, mode: OrderingMode,
                 communities=None, community_weight: str = "structure") -> PlacementPlan:
    """Round-robin across Louvain communities sorted by average IPT.

    Communities come from a structural partition of the fog graph; node
    speed drives the community and member ordering (and can also shape the
    partition via ``community_weight="mean_ipt"``). Apps are ordered by
    descending average message instructions before the mode sequencing.
    Each community keeps a rotating cursor over its IPT-sorted members that
    persists across services; a community with no room passes the service
    to the next one, and the cloud catches anything left over.
    """
    if communities is None:
        communities = louvain_communities(topology, weight=community_weight)
    sorted_apps = sorted(apps, key=lambda a: (-avg_message_instructions(a), a.id))
    services = _sequence(sorted_apps, mode)
    free = _initial_free(topology)
    cursors = [0] * len(communities)
    cloud = topology.cloud_id
    assignments: dict[tuple[int, int], int] = {}
    for service in services:
        placed = None
        for ci, community in enumerate(communities):
            members = community.members
            for step in range(len(members)):
                idx = (cursors[ci] + step) % len(members)
                nid = members[idx]
                if free[nid] >= service.ram_demand:
                    placed = nid
                    cursors[ci] = (idx + 1) % len(members)
                    break
            if placed is not None:
                break
        if placed is None:
            placed = cloud
        free[placed] -= service.ram_demand
        assignments[(service.app_id, service.order)] = placed
    return PlacementPlan(assignments=assignments, residual_ram=free)


# -- strategy registry --------------------------------------------------------


def _run_greedy_latency(topology, apps, mode):
    return greedy_latency_place(topology, order_services(apps, mode))


def _run_greedy_fram(topology, apps, mode):
    return greedy_fram_place(topology, order_services(apps, mode))


def _run_near_gw_pd(topology, apps, mode):
    return near_gateway_place(topology, apps, mode, DistanceMetric.PD)


def _run_near_gw_pd_bw(topology, apps, mode):
    return near_gateway_place(topology, apps, mode, DistanceMetric.PD_BW)


def _run_rr_ipt(topology, apps, mode):
    return rr_ipt_place(topology, apps, mode)


STRATEGIES = {
    "greedy_latency": _run_greedy_latency,
    "greedy_fram": _run_greedy_fram,
    "near_gw_pd": _run_near_gw_pd,
    "near_gw_pd_bw": _run_near_gw_pd_bw,
    "rr_ipt": _run_rr_ipt,
}

STRATEGY_ORDER = tuple(STRATEGIES)
