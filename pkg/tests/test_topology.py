"""Topology generation, gateway/tier derivation, and distance metrics."""

import collections
import math
import random

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import floyd_warshall

from fogplace.errors import ConfigurationError, TopologyError
from fogplace.topology import (
    DistanceMetric,
    Link,
    TopologyParams,
    compute_tiers,
    generate_topology,
    identify_gateways,
    link_latency,
)

from conftest import make_topology


# -- link latency -------------------------------------------------------------


def test_link_latency_fog_link():
    assert link_latency(Link(0, 1, 75_000.0, 2.0)) == pytest.approx(2.0 + 1 / 75_000, abs=1e-12)


def test_link_latency_cloud_link():
    assert link_latency(Link(0, 1, 125_000.0, 500.0)) == pytest.approx(500.000008, abs=1e-9)


def test_link_latency_isolates_bandwidth_term():
    assert link_latency(Link(0, 1, 1.0, 0.0)) == 1.0


def test_link_latency_rejects_nonpositive_bandwidth():
    with pytest.raises(TopologyError):
        link_latency(Link(0, 1, 0.0, 2.0))


# -- generation ---------------------------------------------------------------


def test_generate_default_scale():
    topo = generate_topology(100, seed=42)
    assert len(topo.nodes) == 101
    assert topo.is_connected()
    assert sum(1 for n in topo.nodes.values() if n.is_cloud) == 1


def test_generate_minimum_scale_attribute_ranges():
    topo = generate_topology(3, seed=0)
    assert len(topo.nodes) == 4
    for nid in topo.fog_ids:
        node = topo.nodes[nid]
        assert 10 <= node.ram_capacity <= 25
        assert 500 <= node.ipt <= 1000


def test_generate_rejects_tiny_node_count():
    with pytest.raises(ConfigurationError) as err:
        generate_topology(2, seed=0)
    assert "node_count" in err.value.fields


def test_generate_is_deterministic():
    a = generate_topology(100, seed=42)
    b = generate_topology(100, seed=42)
    assert a.to_text() == b.to_text()


def test_generate_seed_changes_output():
    a = generate_topology(100, seed=42)
    b = generate_topology(100, seed=43)
    assert a.to_text() != b.to_text()


def test_cloud_attributes():
    topo = generate_topology(50, seed=7)
    cloud = topo.nodes[topo.cloud_id]
    assert math.isinf(cloud.ram_capacity)
    assert cloud.ipt == 10_000
    link = topo.link_between(topo.cloud_id, topo.adjacency[topo.cloud_id][0])
    assert link.bandwidth == 125_000.0
    assert link.propagation_delay == 500.0
    assert topo.degree(topo.cloud_id) == 1


def test_cloud_attaches_to_highest_degree_fog_node():
    topo = generate_topology(60, seed=11)
    attach = topo.adjacency[topo.cloud_id][0]
    best = max(topo.fog_ids,
               key=lambda nid: (topo.degree(nid) - (1 if nid == attach else 0), -nid))
    assert attach == best


# -- gateways -----------------------------------------------------------------


def test_gateways_star_leaves():
    topo = make_topology({(0, 1): 2.0, (0, 2): 2.0, (0, 3): 2.0, (0, 4): 2.0})
    assert identify_gateways(topo) == frozenset({1, 2, 3, 4})


def test_gateways_path_endpoints():
    topo = make_topology({(0, 1): 2.0, (1, 2): 2.0})
    assert identify_gateways(topo) == frozenset({0, 2})


def test_gateways_floor_extends_degree_classes():
    # one degree-1 node, rest degree >= 2; a 50% floor pulls in the next class
    edges = {(0, 1): 2.0, (1, 2): 2.0, (2, 0): 2.0, (2, 3): 2.0}
    topo = make_topology(edges)
    assert identify_gateways(topo, floor=0.5) == frozenset({0, 1, 3})


def test_gateways_match_degree_histogram_oracle():
    topo = generate_topology(100, seed=42)
    degrees = collections.Counter()
    for link in topo.links.values():
        degrees[link.endpoint_a] += 1
        degrees[link.endpoint_b] += 1
    fog = topo.fog_ids
    by_degree = {}
    for nid in fog:
        by_degree.setdefault(degrees[nid], []).append(nid)
    expected = []
    for deg in sorted(by_degree):
        expected.extend(by_degree[deg])
        if len(expected) >= math.ceil(0.05 * len(fog)):
            break
    assert topo.gateways == frozenset(expected)
    assert topo.cloud_id not in topo.gateways
    assert topo.gateways


# -- tiers --------------------------------------------------------------------


def test_tiers_on_path(path_topology):
    tiers = compute_tiers(path_topology, gateways={0})
    assert tiers == {0: 2, 1: 1, 2: 0}


def test_gateway_gets_maximum_tier():
    topo = generate_topology(40, seed=3)
    max_tier = max(topo.nodes[n].tier for n in topo.node_ids)
    for g in topo.gateways:
        assert topo.nodes[g].tier == max_tier


def test_tiers_match_bfs_oracle():
    topo = generate_topology(100, seed=42)
    g = nx.Graph()
    g.add_nodes_from(topo.node_ids)
    g.add_edges_from(topo.links)
    hops = {}
    for nid in topo.node_ids:
        hops[nid] = min(nx.shortest_path_length(g, nid, gw) for gw in topo.gateways)
    max_hops = max(hops.values())
    for nid in topo.node_ids:
        assert topo.nodes[nid].tier == max_hops - hops[nid]


def test_adjacent_tiers_differ_by_at_most_one():
    topo = generate_topology(80, seed=9)
    for (a, b) in topo.links:
        assert abs(topo.nodes[a].tier - topo.nodes[b].tier) <= 1


# -- node latency metrics -----------------------------------------------------


def test_avg_link_latency_single_link():
    topo = make_topology({(0, 1): 4.0})
    assert topo.avg_link_latency(0) == pytest.approx(4.0 + 1 / 75_000, abs=1e-12)


def test_avg_link_latency_mean_of_two():
    topo = make_topology({(0, 1): 2.0, (0, 2): 10.0})
    assert topo.avg_link_latency(0) == pytest.approx(6.0 + 1 / 75_000, abs=1e-12)


def test_avg_link_latency_matches_bruteforce():
    topo = generate_topology(100, seed=42)
    for nid in topo.node_ids:
        incident = [l for l in topo.links.values() if nid in (l.endpoint_a, l.endpoint_b)]
        expected = sum(l.propagation_delay + 1 / l.bandwidth for l in incident) / len(incident)
        assert topo.avg_link_latency(nid) == pytest.approx(expected, abs=1e-12)


# -- distances ----------------------------------------------------------------


def test_distance_identity(path_topology):
    for metric in DistanceMetric:
        assert path_topology.distance(1, 1, metric) == 0.0


def test_distance_along_path(path_topology):
    assert path_topology.distance(0, 2, DistanceMetric.PD) == pytest.approx(5.0)
    assert path_topology.distance(0, 2, DistanceMetric.PD_BW) == pytest.approx(5.0 + 2 / 75_000)


def test_distance_unknown_node(path_topology):
    with pytest.raises(TopologyError):
        path_topology.distance(0, 99, DistanceMetric.PD)


def _floyd_warshall_oracle(topo, metric):
    ids = topo.node_ids
    index = {nid: i for i, nid in enumerate(ids)}
    n = len(ids)
    dense = np.full((n, n), np.inf)
    for link in topo.links.values():
        w = link.propagation_delay
        if metric is DistanceMetric.PD_BW:
            w += 1 / link.bandwidth
        i, j = index[link.endpoint_a], index[link.endpoint_b]
        dense[i, j] = min(dense[i, j], w)
        dense[j, i] = min(dense[j, i], w)
    dense[np.isinf(dense)] = 0.0
    return floyd_warshall(csr_matrix(dense), directed=False), index


@pytest.mark.parametrize("metric", list(DistanceMetric))
def test_all_pairs_distance_matches_floyd_warshall(metric):
    topo = generate_topology(10, seed=7)
    dist, index = _floyd_warshall_oracle(topo, metric)
    for u in topo.node_ids:
        for v in topo.node_ids:
            assert abs(topo.distance(u, v, metric) - dist[index[u], index[v]]) <= 1e-9


def test_distance_symmetry_and_triangle_inequality():
    topo = generate_topology(30, seed=5)
    rng = random.Random(0)
    ids = topo.node_ids
    for metric in DistanceMetric:
        for _ in range(60):
            a, b, c = rng.choice(ids), rng.choice(ids), rng.choice(ids)
            ab = topo.distance(a, b, metric)
            assert ab == pytest.approx(topo.distance(b, a, metric), abs=1e-9)
            assert ab <= topo.distance(a, c, metric) + topo.distance(c, b, metric) + 1e-9


# -- gateway distance ---------------------------------------------------------


def test_avg_distance_single_gateway_is_zero_at_gateway(path_topology):
    assert path_topology.avg_distance_to_gateways(0, DistanceMetric.PD) == 0.0


def test_avg_distance_between_two_gateways():
    topo = make_topology({(0, 1): 2.0, (1, 2): 3.0}, gateways={0, 2})
    assert topo.avg_distance_to_gateways(1, DistanceMetric.PD) == pytest.approx(2.5)


def test_avg_distance_matches_bruteforce():
    topo = generate_topology(20, seed=7)
    for metric in DistanceMetric:
        for nid in topo.node_ids:
            expected = sum(topo.distance(nid, g, metric) for g in topo.gateways)
            expected /= len(topo.gateways)
            assert topo.avg_distance_to_gateways(nid, metric) == pytest.approx(expected, abs=1e-12)


def test_avg_distance_requires_gateways():
    topo = make_topology({(0, 1): 2.0})
    with pytest.raises(TopologyError):
        topo.avg_distance_to_gateways(0, DistanceMetric.PD)


# -- route decomposition -------------------------------------------------------


def test_route_terms_reconstruct_shortest_latency_path():
    topo = generate_topology(25, seed=13)
    for u in topo.node_ids[:8]:
        for v in topo.node_ids[:8]:
            pd_total, inv_total = topo.route_terms(u, v)
            assert pd_total + inv_total == pytest.approx(
                topo.distance(u, v, DistanceMetric.PD_BW), abs=1e-9)


# -- generated-topology invariants ---------------------------------------------


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**63 - 1),
       count=st.integers(min_value=3, max_value=60))
def test_generation_invariants(seed, count):
    topo = generate_topology(count, seed=seed)
    assert topo.is_connected()
    assert len(topo.nodes) == count + 1
    assert sum(1 for n in topo.nodes.values() if n.is_cloud) == 1
    assert topo.gateways and topo.cloud_id not in topo.gateways
    for link in topo.links.values():
        lat = link_latency(link)
        assert lat > link.propagation_delay
        assert lat - link.propagation_delay == pytest.approx(1 / link.bandwidth, rel=1e-9)
        if topo.cloud_id in (link.endpoint_a, link.endpoint_b):
            assert link.propagation_delay == 500.0
        else:
            assert 2.0 <= link.propagation_delay <= 10.0
    for nid in topo.fog_ids:
        node = topo.nodes[nid]
        assert 10 <= node.ram_capacity <= 25
        assert node.free_ram == node.ram_capacity
        assert 500 <= node.ipt <= 1000


def test_uniform_delays_without_depth_blend():
    params = TopologyParams(delay_depth_weight=0.0)
    topo = generate_topology(100, seed=1, params=params)
    delays = [l.propagation_delay for l in topo.links.values()
              if topo.cloud_id not in (l.endpoint_a, l.endpoint_b)]
    assert min(delays) >= 2.0 and max(delays) <= 10.0
    assert np.std(delays) > 1.0  # spread out, not collapsed by the blend


def test_serialization_has_expected_sections():
    topo = generate_topology(10, seed=0)
    text = topo.to_text()
    assert text.startswith("[nodes]")
    assert "[links]" in text and "[gateways]" in text
    assert "inf" in text  # cloud capacity sentinel
