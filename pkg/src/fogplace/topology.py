"""Cloud-to-edge network graphs and the distance metrics used by placement.

A topology is a connected, undirected graph of fog/edge nodes plus exactly one
cloud node. Fog nodes carry finite RAM and processing speed drawn from
configured ranges; the cloud has unbounded RAM (``math.inf``) and fixed speed.
Gateways (the user-facing edge layer) and per-node tiers are derived from the
graph structure.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass
from enum import Enum

from .errors import ConfigurationError, TopologyError


class DistanceMetric(Enum):
    """Edge weight used for shortest-path distances between nodes."""

    PD = "pd"          # propagation delay only
    PD_BW = "pd_bw"    # propagation delay plus reciprocal bandwidth


@dataclass(frozen=True)
class Node:
    id: int
    ram_capacity: float      # MB; math.inf on the cloud node
    free_ram: float          # MB; equals capacity on a freshly built topology
    ipt: int                 # instructions per millisecond
    tier: int                # larger = closer to the end-user edge
    is_cloud: bool = False


@dataclass(frozen=True)
class Link:
    endpoint_a: int
    endpoint_b: int
    bandwidth: float           # bytes per millisecond
    propagation_delay: float   # milliseconds


@dataclass(frozen=True)
class TopologyParams:
    """Generation parameters; defaults follow the standard scenario."""

    ram_range: tuple[int, int] = (10, 25)              # MB per fog node
    ipt_range: tuple[int, int] = (500, 1000)           # instructions/ms
    bandwidth: float = 75_000.0                        # bytes/ms, fog links
    delay_range: tuple[float, float] = (2.0, 10.0)     # ms, fog links
    cloud_ipt: int = 10_000
    cloud_bandwidth: float = 125_000.0
    cloud_delay: float = 500.0
    attachment_edges: int = 2       # preferential-attachment edges per node
    gateway_floor: float = 0.05     # min gateway share of fog nodes
    # Blend factor in [0, 1]: 0 draws link delays i.i.d. uniform over
    # delay_range; 1 makes delay grow deterministically with the link's hop
    # depth from the gateway layer (deeper toward the core = slower), which
    # mirrors a continuum whose latency falls toward the edge.
    delay_depth_weight: float = 0.85


def link_latency(link: Link) -> float:
    """Routing latency of a link: propagation delay plus 1/bandwidth."""
    if link.bandwidth <= 0:
        raise TopologyError(
            f"link ({link.endpoint_a}, {link.endpoint_b}) has non-positive "
            f"bandwidth {link.bandwidth}"
        )
    return link.propagation_delay + 1.0 / link.bandwidth


class Topology:
    """Immutable node/link graph with cached distance queries."""

    def __init__(self, nodes, links, gateways=frozenset()):
        self.nodes: dict[int, Node] = {n.id: n for n in nodes}
        self.links: dict[tuple[int, int], Link] = {}
        adjacency: dict[int, list[int]] = {nid: [] for nid in self.nodes}
        for link in links:
            a, b = link.endpoint_a, link.endpoint_b
            if a == b:
                raise TopologyError(f"self-loop on node {a}")
            if a not in self.nodes or b not in self.nodes:
                raise TopologyError(f"link ({a}, {b}) references unknown node")
            key = (a, b) if a < b else (b, a)
            if key in self.links:
                raise TopologyError(f"duplicate link between {a} and {b}")
            self.links[key] = link
            adjacency[a].append(b)
            adjacency[b].append(a)
        self.adjacency: dict[int, tuple[int, ...]] = {
            nid: tuple(sorted(neigh)) for nid, neigh in adjacency.items()
        }
        self.gateways: frozenset[int] = frozenset(gateways)
        self._avg_link_latency: dict[int, float] | None = None
        self._link_counts: dict[int, int] = {}
        self._dist_cache: dict[DistanceMetric, dict[int, dict[int, float]]] = {}
        self._route_terms: dict[int, dict[int, tuple[float, float]]] | None = None

    # -- basic queries ----------------------------------------------------

    @property
    def node_ids(self) -> list[int]:
        return sorted(self.nodes)

    @property
    def cloud_id(self) -> int:
        for nid in self.node_ids:
            if self.nodes[nid].is_cloud:
                return nid
        raise TopologyError("topology has no cloud node")

    @property
    def fog_ids(self) -> list[int]:
        return [nid for nid in self.node_ids if not self.nodes[nid].is_cloud]

    def degree(self, node_id: int) -> int:
        return len(self.adjacency[node_id])

    def link_between(self, a: int, b: int) -> Link:
        key = (a, b) if a < b else (b, a)
        return self.links[key]

    def is_connected(self) -> bool:
        if not self.nodes:
            return False
        start = next(iter(self.node_ids))
        seen = {start}
        frontier = [start]
        while frontier:
            nid = frontier.pop()
            for other in self.adjacency[nid]:
                if other not in seen:
                    seen.add(other)
                    frontier.append(other)
        return len(seen) == len(self.nodes)

    # -- latency metrics ---------------------------------------------------

    def avg_link_latency(self, node_id: int) -> float:
        """Mean routing latency over the links incident to ``node_id``."""
        if self._avg_link_latency is None:
            sums: dict[int, float] = {nid: 0.0 for nid in self.nodes}
            counts: dict[int, int] = {nid: 0 for nid in self.nodes}
            for link in self.links.values():
                lat = link_latency(link)
                for end in (link.endpoint_a, link.endpoint_b):
                    sums[end] += lat
                    counts[end] += 1
            self._avg_link_latency = {
                nid: (sums[nid] / counts[nid]) if counts[nid] else math.nan
                for nid in self.nodes
            }
            self._link_counts = counts
        if self._link_counts[node_id] == 0:
            raise TopologyError(f"node {node_id} has no incident links")
        return self._avg_link_latency[node_id]

    def _edge_weight(self, link: Link, metric: DistanceMetric) -> float:
        if metric is DistanceMetric.PD:
            return link.propagation_delay
        return link.propagation_delay + 1.0 / link.bandwidth

    def _shortest_from(self, source: int, metric: DistanceMetric) -> dict[int, float]:
        dist = {source: 0.0}
        heap = [(0.0, source)]
        done: set[int] = set()
        while heap:
            d, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            for v in self.adjacency[u]:
                w = self._edge_weight(self.link_between(u, v), metric)
                nd = d + w
                if v not in dist or nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        return dist

    def distance(self, source: int, target: int, metric: DistanceMetric) -> float:
        """Shortest-path distance under ``metric``; 0 for source == target."""
        if source not in self.nodes or target not in self.nodes:
            raise TopologyError(f"unknown node in distance({source}, {target})")
        cache = self._dist_cache.setdefault(metric, {})
        if source not in cache:
            cache[source] = self._shortest_from(source, metric)
        row = cache[source]
        if target not in row:
            raise TopologyError(f"node {target} unreachable from {source}")
        return row[target]

    def avg_distance_to_gateways(self, node_id: int, metric: DistanceMetric) -> float:
        """Mean distance from ``node_id`` to every gateway."""
        if not self.gateways:
            raise TopologyError("topology has no gateways")
        total = sum(self.distance(node_id, g, metric) for g in sorted(self.gateways))
        return total / len(self.gateways)

    def route_terms(self, source: int, target: int) -> tuple[float, float]:
        """Per-route delay components along the latency-weighted shortest path.

        Returns ``(pd_total, inv_bw_total)`` summed over the path's links, so a
        message of ``size`` bytes takes ``pd_total + size * inv_bw_total`` ms.
        """
        if self._route_terms is None:
            self._route_terms = {}
        if source not in self._route_terms:
            self._route_terms[source] = self._route_terms_from(source)
        try:
            return self._route_terms[source][target]
        except KeyError:
            raise TopologyError(f"node {target} unreachable from {source}") from None

    def _route_terms_from(self, source: int) -> dict[int, tuple[float, float]]:
        dist = {source: 0.0}
        terms = {source: (0.0, 0.0)}
        heap = [(0.0, source)]
        done: set[int] = set()
        while heap:
            d, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            pd_u, inv_u = terms[u]
            for v in self.adjacency[u]:
                link = self.link_between(u, v)
                nd = d + link.propagation_delay + 1.0 / link.bandwidth
                if v not in dist or nd < dist[v]:
                    dist[v] = nd
                    terms[v] = (pd_u + link.propagation_delay, inv_u + 1.0 / link.bandwidth)
                    heapq.heappush(heap, (nd, v))
        return terms

    # -- serialization -----------------------------------------------------

    def to_text(self) -> str:
        """Structured-text dump (node table, link table, gateway list)."""
        lines = ["[nodes]", "id ram_capacity free_ram ipt tier is_cloud"]
        for nid in self.node_ids:
            n = self.nodes[nid]
            cap = "inf" if math.isinf(n.ram_capacity) else repr(n.ram_capacity)
            free = "inf" if math.isinf(n.free_ram) else repr(n.free_ram)
            lines.append(f"{n.id} {cap} {free} {n.ipt} {n.tier} {int(n.is_cloud)}")
        lines.append("[links]")
        lines.append("endpoint_a endpoint_b bandwidth propagation_delay")
        for key in sorted(self.links):
            l = self.links[key]
            lines.append(f"{key[0]} {key[1]} {repr(l.bandwidth)} {repr(l.propagation_delay)}")
        lines.append("[gateways]")
        lines.append(" ".join(str(g) for g in sorted(self.gateways)))
        return "\n".join(lines) + "\n"


# -- gateway and tier derivation -------------------------------------------


def identify_gateways(topology: Topology, floor: float = 0.05) -> frozenset[int]:
    """Lowest-degree fog nodes, widened degree class by degree class until
    they make up at least ``floor`` of the fog node count."""
    fog = topology.fog_ids
    by_degree: dict[int, list[int]] = {}
    for nid in fog:
        by_degree.setdefault(topology.degree(nid), []).append(nid)
    threshold = math.ceil(floor * len(fog))
    gateways: list[int] = []
    for deg in sorted(by_degree):
        gateways.extend(by_degree[deg])
        if len(gateways) >= threshold:
            break
    return frozenset(gateways)


def compute_tiers(topology: Topology, gateways=None) -> dict[int, int]:
    """Tier per node: inverted BFS hop count to the nearest gateway.

    Gateways receive the maximum tier; hops decrease it by one per level.
    """
    sources = sorted(gateways if gateways is not None else topology.gateways)
    if not sources:
        raise TopologyError("cannot compute tiers without gateways")
    hops = {g: 0 for g in sources}
    frontier = list(sources)
    while frontier:
        nxt: list[int] = []
        for nid in frontier:
            for other in topology.adjacency[nid]:
                if other not in hops:
                    hops[other] = hops[nid] + 1
                    nxt.append(other)
        frontier = nxt
    max_hops = max(hops.values())
    return {nid: max_hops - h for nid, h in hops.items()}


# -- generation --------------------------------------------------------------


def _preferential_attachment_edges(n: int, m: int, rng: random.Random) -> list[tuple[int, int]]:
    """Barabasi-Albert edge list over nodes 0..n-1 (star seed of m+1 nodes)."""
    edges = [(0, i) for i in range(1, m + 1)]
    # One entry per incident edge end; sampling from it is degree-proportional.
    repeated = [0] * m + list(range(1, m + 1))
    for source in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(rng.choice(repeated))
        for t in sorted(targets):
            edges.append((t, source))
            repeated.append(t)
        repeated.extend([source] * m)
    return edges


def generate_topology(node_count: int, seed: int, params: TopologyParams = TopologyParams()) -> Topology:
    """Build a connected fog graph of ``node_count`` nodes plus one cloud node.

    The fog graph grows by preferential attachment; the cloud hangs off the
    highest-degree fog node by a single high-delay link. All random attributes
    come from one generator seeded with ``seed``, so equal arguments rebuild
    an identical topology.
    """
    if node_count < 3:
        raise ConfigurationError(
            f"node_count must be at least 3, got {node_count}", fields=("node_count",)
        )
    rng = random.Random(seed)
    m = min(params.attachment_edges, node_count - 1)
    edges = _preferential_attachment_edges(node_count, m, rng)

    degrees = [0] * node_count
    for a, b in edges:
        degrees[a] += 1
        degrees[b] += 1
    # Cloud sits behind the core: attach to the best-connected fog node.
    attach = max(range(node_count), key=lambda nid: (degrees[nid], -nid))
    cloud_id = node_count

    ram = {nid: rng.randint(*params.ram_range) for nid in range(node_count)}
    ipt = {nid: rng.randint(*params.ipt_range) for nid in range(node_count)}

    provisional_nodes = [
        Node(id=nid, ram_capacity=float(ram[nid]), free_ram=float(ram[nid]),
             ipt=ipt[nid], tier=0)
        for nid in range(node_count)
    ]
    provisional_nodes.append(
        Node(id=cloud_id, ram_capacity=math.inf, free_ram=math.inf,
             ipt=params.cloud_ipt, tier=0, is_cloud=True)
    )
    plain_links = [
        Link(a, b, params.bandwidth, 0.0) for a, b in sorted((min(e), max(e)) for e in edges)
    ]
    cloud_link = Link(min(attach, cloud_id), max(attach, cloud_id),
                      params.cloud_bandwidth, params.cloud_delay)
    skeleton = Topology(provisional_nodes, plain_links + [cloud_link])

    gateways = identify_gateways(skeleton, params.gateway_floor)
    tiers = compute_tiers(skeleton, gateways)

    lo, hi = params.delay_range
    w = params.delay_depth_weight
    fog_sums = [
        tiers[a] + tiers[b]
        for (a, b) in skeleton.links
        if a != cloud_id and b != cloud_id
    ]
    max_sum, min_sum = max(fog_sums), min(fog_sums)
    span = max(1, max_sum - min_sum)
    links: list[Link] = []
    for a, b in sorted(skeleton.links):
        if cloud_id in (a, b):
            links.append(cloud_link)
            continue
        u = rng.uniform(0.0, 1.0)
        # Depth 0 = both endpoints at the gateway tier; deeper links are slower.
        depth = (max_sum - (tiers[a] + tiers[b])) / span
        position = (1.0 - w) * u + w * depth
        links.append(Link(a, b, params.bandwidth, lo + (hi - lo) * position))

    final_nodes = [
        Node(id=n.id, ram_capacity=n.ram_capacity, free_ram=n.free_ram,
             ipt=n.ipt, tier=tiers[n.id], is_cloud=n.is_cloud)
        for n in provisional_nodes
    ]
    topo = Topology(final_nodes, links, gateways)
    if not topo.is_connected():
        raise TopologyError("generated topology is not connected")
    return topo
