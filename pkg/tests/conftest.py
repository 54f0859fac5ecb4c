"""Shared builders for hand-crafted topologies and workloads."""

import math

import pytest

from fogplace.topology import Link, Node, Topology
from fogplace.workload import App, Message, Service


def make_topology(edges, ram=None, ipt=None, tiers=None, gateways=(),
                  cloud=None, bandwidth=75_000.0):
    """Build a topology from ``edges`` = {(a, b): propagation_delay}.

    ``ram``/``ipt``/``tiers`` are per-node dicts with fallback defaults;
    ``cloud`` marks one node id as the cloud (infinite RAM).
    """
    node_ids = sorted({n for edge in edges for n in edge})
    ram = ram or {}
    ipt = ipt or {}
    tiers = tiers or {}
    nodes = []
    for nid in node_ids:
        if cloud is not None and nid == cloud:
            nodes.append(Node(id=nid, ram_capacity=math.inf, free_ram=math.inf,
                              ipt=ipt.get(nid, 10_000), tier=tiers.get(nid, 0),
                              is_cloud=True))
        else:
            capacity = float(ram.get(nid, 100))
            nodes.append(Node(id=nid, ram_capacity=capacity, free_ram=capacity,
                              ipt=ipt.get(nid, 750), tier=tiers.get(nid, 0)))
    links = [Link(min(a, b), max(a, b), bandwidth, pd) for (a, b), pd in edges.items()]
    return Topology(nodes, links, frozenset(gateways))


def make_app(app_id, ram_demands, period=500.0, sizes=None, instructions=None):
    """Linear-chain app with explicit per-service RAM demands."""
    n = len(ram_demands)
    sizes = sizes or [2_000_000] * n
    instructions = instructions or [30_000] * n
    services = tuple(Service(app_id=app_id, order=k, ram_demand=ram_demands[k])
                     for k in range(n))
    messages = tuple(Message(app_id=app_id, from_order=k - 1, to_order=k,
                             size=sizes[k], instructions=instructions[k])
                     for k in range(n))
    return App(id=app_id, request_period=period, services=services, messages=messages)


@pytest.fixture
def path_topology():
    """g - x - y path with PDs 2 and 3, gateway at g (node 0)."""
    return make_topology({(0, 1): 2.0, (1, 2): 3.0},
                         tiers={0: 2, 1: 1, 2: 0}, gateways={0})
