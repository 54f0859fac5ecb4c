"""Deterministic Louvain partitioning of the fog subgraph.

Edge weights lift node processing speed onto links as the mean endpoint IPT,
so communities group well-connected regions of similar compute capacity. All
iteration orders are fixed (ascending node id) and moves require a strict
modularity gain, which makes the partition a pure function of the topology.
"""

from __future__ import annotations

from dataclasses import dataclass

from .topology import Topology

_GAIN_EPS = 1e-7


@dataclass(frozen=True)
class Community:
    members: tuple[int, ...]   # sorted by descending ipt, ties ascending id
    average_ipt: float


# Edge weight lifts available to the partition; nodes' processing speed can
# shape the communities (mean_ipt) or only their ordering (structure).
WEIGHT_POLICIES = {
    "mean_ipt": lambda ipt_u, ipt_v: (ipt_u + ipt_v) / 2.0,
    "structure": lambda ipt_u, ipt_v: 1.0,
}


def _weighted_fog_graph(topology: Topology, weight: str) -> dict[int, dict[int, float]]:
    policy = WEIGHT_POLICIES[weight]
    fog = set(topology.fog_ids)
    adj: dict[int, dict[int, float]] = {nid: {} for nid in sorted(fog)}
    for (a, b), _link in sorted(topology.links.items()):
        if a in fog and b in fog:
            w = policy(topology.nodes[a].ipt, topology.nodes[b].ipt)
            adj[a][b] = w
            adj[b][a] = w
    return adj


def _modularity(adj, membership, strength, total_weight) -> float:
    if total_weight == 0:
        return 0.0
    intra: dict[int, float] = {}
    strength_sum: dict[int, float] = {}
    for u, neigh in adj.items():
        cu = membership[u]
        strength_sum[cu] = strength_sum.get(cu, 0.0) + strength[u]
        for v, w in neigh.items():
            if u < v and membership[v] == cu:
                intra[cu] = intra.get(cu, 0.0) + w
    q = 0.0
    for c, k in strength_sum.items():
        q += intra.get(c, 0.0) / total_weight - (k / (2.0 * total_weight)) ** 2
    return q


def _local_moves(adj, strength, total_weight, membership):
    """Sweep nodes in ascending id, greedily reassigning communities."""
    comm_strength: dict[int, float] = {}
    for u in adj:
        comm_strength[membership[u]] = comm_strength.get(membership[u], 0.0) + strength[u]
    moved_any = False
    improved = True
    while improved:
        improved = False
        for u in sorted(adj):
            cu = membership[u]
            k_u = strength[u]
            comm_strength[cu] -= k_u
            weights_to: dict[int, float] = {}
            for v, w in adj[u].items():
                if v != u:
                    cv = membership[v]
                    weights_to[cv] = weights_to.get(cv, 0.0) + w
            stay_gain = weights_to.get(cu, 0.0) - comm_strength.get(cu, 0.0) * k_u / (2.0 * total_weight)
            best_comm, best_gain = cu, stay_gain
            for cand in sorted(weights_to):
                if cand == cu:
                    continue
                gain = weights_to[cand] - comm_strength.get(cand, 0.0) * k_u / (2.0 * total_weight)
                if gain > best_gain + _GAIN_EPS:
                    best_comm, best_gain = cand, gain
            membership[u] = best_comm
            comm_strength[best_comm] = comm_strength.get(best_comm, 0.0) + k_u
            if best_comm != cu:
                improved = True
                moved_any = True
    return moved_any


def _aggregate(adj, self_loops, membership):
    """Collapse communities into super-nodes, relabelled by smallest member."""
    groups: dict[int, list[int]] = {}
    for u in sorted(adj):
        groups.setdefault(membership[u], []).append(u)
    ordered = sorted(groups.values(), key=lambda members: members[0])
    relabel = {old_u: new_c for new_c, members in enumerate(ordered) for old_u in members}
    new_adj: dict[int, dict[int, float]] = {c: {} for c in range(len(ordered))}
    new_self: dict[int, float] = {c: 0.0 for c in range(len(ordered))}
    for c, members in enumerate(ordered):
        for u in members:
            new_self[c] += self_loops.get(u, 0.0)
    for u, neigh in adj.items():
        cu = relabel[u]
        for v, w in neigh.items():
            if u < v:
                cv = relabel[v]
                if cu == cv:
                    new_self[cu] += w
                else:
                    new_adj[cu][cv] = new_adj[cu].get(cv, 0.0) + w
                    new_adj[cv][cu] = new_adj[cv].get(cu, 0.0) + w
    return new_adj, new_self, relabel


def _louvain_partition(adj0: dict[int, dict[int, float]]) -> dict[int, int]:
    """Return a membership map original node -> community label."""
    node_to_final = {u: u for u in adj0}
    adj = {u: dict(neigh) for u, neigh in adj0.items()}
    self_loops: dict[int, float] = {u: 0.0 for u in adj}
    total_weight = sum(w for u, neigh in adj0.items() for v, w in neigh.items() if u < v)
    if total_weight == 0:
        return node_to_final

    def strengths():
        return {
            u: sum(w for v, w in adj[u].items() if v != u) + 2.0 * self_loops[u]
            for u in adj
        }

    strength0 = {u: sum(adj0[u].values()) for u in adj0}
    prev_q = _modularity(adj0, node_to_final, strength0, total_weight)
    while True:
        membership = {u: u for u in adj}
        moved = _local_moves(adj, strengths(), total_weight, membership)
        if not moved:
            break
        adj, self_loops, relabel = _aggregate(adj, self_loops, membership)
        node_to_final = {orig: relabel[cur] for orig, cur in node_to_final.items()}
        flat = {u: node_to_final[u] for u in adj0}
        q = _modularity(adj0, flat, strength0, total_weight)
        if q - prev_q < _GAIN_EPS:
            break
        prev_q = q
    return node_to_final


def louvain_communities(topology: Topology, weight: str = "mean_ipt") -> list[Community]:
    """Partition the fog nodes into communities ordered by average IPT.

    ``weight`` picks the edge-weight policy: ``mean_ipt`` blends node speed
    into the partition, ``structure`` partitions on the bare graph. Either
    way communities are sorted by descending average member IPT (ties by the
    smallest member id) and members by descending IPT (ties by ascending id).
    Fewer than two fog nodes yield a single trivial community.
    """
    fog = topology.fog_ids
    if len(fog) < 2:
        members = tuple(fog)
        avg = topology.nodes[fog[0]].ipt if fog else 0.0
        return [Community(members=members, average_ipt=float(avg))]
    adj = _weighted_fog_graph(topology, weight)
    membership = _louvain_partition(adj)
    groups: dict[int, list[int]] = {}
    for nid in sorted(membership):
        groups.setdefault(membership[nid], []).append(nid)
    communities = []
    for members in groups.values():
        ordered = tuple(sorted(members, key=lambda nid: (-topology.nodes[nid].ipt, nid)))
        avg = sum(topology.nodes[nid].ipt for nid in members) / len(members)
        communities.append(Community(members=ordered, average_ipt=avg))
    communities.sort(key=lambda c: (-c.average_ipt, min(c.members)))
    return communities
