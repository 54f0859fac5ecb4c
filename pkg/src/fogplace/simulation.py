"""Deterministic event-driven replay of user traffic through a placement.

Each user source emits requests at fixed intervals starting from a seeded
phase. A request walks its app's chain: the user message travels from the
gateway to the zero-order host, then each inter-service message follows the
latency-weighted shortest path between hosts, paying propagation delay plus
size/bandwidth per hop. Hosting nodes are single-server FIFO queues with
service time instructions/IPT; links carry no contention. Emission stops at
``duration`` and the event queue then drains, so every emitted request
completes and post-warmup requests yield exactly one latency sample each.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass
from collections import deque

from .errors import IncompletePlanError
from .placement import PlacementPlan
from .topology import Topology
from .workload import UserSource

REQUEST_EMITTED = "RequestEmitted"
MESSAGE_DELIVERED = "MessageDelivered"
SERVICE_COMPLETED = "ServiceCompleted"

_EMIT, _DELIVER, _COMPLETE = 0, 1, 2
_KIND_NAMES = {_EMIT: REQUEST_EMITTED, _DELIVER: MESSAGE_DELIVERED, _COMPLETE: SERVICE_COMPLETED}


@dataclass(frozen=True)
class Event:
    timestamp: float
    sequence: int
    kind: str
    request_id: int
    app_id: int
    service_order: int
    node_id: int


@dataclass(frozen=True)
class LatencySample:
    app_id: int
    request_id: int
    latency: float


@dataclass(frozen=True)
class SimulationConfig:
    duration: float          # ms of emission time
    warmup: float = 0.0      # samples emitted before this are discarded
    seed: int = 0            # drives the per-user phase offsets

    def __post_init__(self):
        if not (0 <= self.warmup < self.duration):
            raise ValueError(
                f"require 0 <= warmup < duration, got warmup={self.warmup} "
                f"duration={self.duration}"
            )


class _AppRoute:
    """Per-app constants: hosts, per-leg network delays, service times."""

    __slots__ = ("hosts", "leg_delays", "service_times", "last_order")

    def __init__(self, topology: Topology, app, user: UserSource, plan: PlacementPlan):
        chain = sorted(app.services, key=lambda s: s.order)
        messages = sorted(app.messages, key=lambda m: m.to_order)
        self.hosts = [plan.assignments[(app.id, s.order)] for s in chain]
        self.last_order = len(chain) - 1
        self.leg_delays = []
        self.service_times = []
        prev = user.gateway
        for msg, service in zip(messages, chain):
            host = self.hosts[service.order]
            pd_total, inv_bw_total = topology.route_terms(prev, host)
            self.leg_delays.append(pd_total + msg.size * inv_bw_total)
            self.service_times.append(msg.instructions / topology.nodes[host].ipt)
            prev = host


def run_simulation(topology: Topology, apps, users, plan: PlacementPlan,
                   config: SimulationConfig, trace=None) -> list[LatencySample]:
    """Replay the workload through ``plan`` and collect per-request latency.

    ``trace``, when given, is a writable text stream receiving one line per
    event: ``timestamp sequence kind request app order node``.
    """
    for app in apps:
        for service in app.services:
            if (app.id, service.order) not in plan.assignments:
                raise IncompletePlanError(
                    f"plan lacks an assignment for app {app.id} service {service.order}"
                )

    apps_by_id = {app.id: app for app in apps}
    users_by_app = {u.app_id: u for u in users}
    routes = {
        app_id: _AppRoute(topology, apps_by_id[app_id], users_by_app[app_id], plan)
        for app_id in sorted(apps_by_id)
    }
    gateways_of = {u.app_id: u.gateway for u in users}

    rng = random.Random(config.seed)
    heap: list[tuple[float, int, int, int, int]] = []  # (t, seq, kind, request, order)
    seq = 0
    emissions: list[tuple[int, float]] = []  # request -> (app_id, emitted_at)
    for app_id in sorted(apps_by_id):
        period = users_by_app[app_id].request_period
        t = rng.uniform(0.0, period)
        while t < config.duration:
            request = len(emissions)
            emissions.append((app_id, t))
            heap.append((t, seq, _EMIT, request, -1))
            seq += 1
            t += period
    heapq.heapify(heap)

    queues: dict[int, deque] = {nid: deque() for nid in topology.node_ids}
    busy: dict[int, bool] = {nid: False for nid in topology.node_ids}
    samples: list[LatencySample] = []

    def emit_trace(t, s, kind, request, order, node):
        if trace is not None:
            trace.write(f"{t:.6f} {s} {_KIND_NAMES[kind]} request={request} "
                        f"app={emissions[request][0]} order={order} node={node}\n")

    def push(t, kind, request, order):
        nonlocal seq
        heapq.heappush(heap, (t, seq, kind, request, order))
        seq += 1

    def start_service(t, node, request, order):
        app_id = emissions[request][0]
        busy[node] = True
        push(t + routes[app_id].service_times[order], _COMPLETE, request, order)

    while heap:
        t, s, kind, request, order = heapq.heappop(heap)
        app_id, emitted_at = emissions[request]
        route = routes[app_id]
        if kind == _EMIT:
            emit_trace(t, s, kind, request, order, gateways_of[app_id])
            push(t + route.leg_delays[0], _DELIVER, request, 0)
        elif kind == _DELIVER:
            node = route.hosts[order]
            emit_trace(t, s, kind, request, order, node)
            if busy[node]:
                queues[node].append((request, order))
            else:
                start_service(t, node, request, order)
        else:
            node = route.hosts[order]
            emit_trace(t, s, kind, request, order, node)
            if queues[node]:
                next_request, next_order = queues[node].popleft()
                start_service(t, node, next_request, next_order)
            else:
                busy[node] = False
            if order == route.last_order:
                if emitted_at >= config.warmup:
                    samples.append(LatencySample(app_id=app_id, request_id=request,
                                                 latency=t - emitted_at))
            else:
                push(t + route.leg_delays[order + 1], _DELIVER, request, order + 1)
    return samples
