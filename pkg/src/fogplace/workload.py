"""Applications, their service chains, messages, and user traffic sources.

An application is a linear chain of services. Exactly one message connects
each consecutive pair, and one extra message models the user request entering
the chain's first (zero-order) service. Message ``instructions`` are executed
by the receiving service.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import ConfigurationError
from .topology import Topology


@dataclass(frozen=True)
class Service:
    app_id: int
    order: int        # 0-based position in the chain
    ram_demand: int   # MB


@dataclass(frozen=True)
class Message:
    app_id: int
    from_order: int   # -1 denotes the user request into the zero-order service
    to_order: int
    size: int         # bytes
    instructions: int  # executed by the receiving service


@dataclass(frozen=True)
class App:
    id: int
    request_period: float   # ms between user requests
    services: tuple[Service, ...]
    messages: tuple[Message, ...]


@dataclass(frozen=True)
class UserSource:
    app_id: int
    gateway: int
    request_period: float


@dataclass(frozen=True)
class WorkloadParams:
    """Generation parameters; defaults follow the standard scenario."""

    services_range: tuple[int, int] = (2, 10)
    ram_range: tuple[int, int] = (1, 6)                       # MB
    instructions_range: tuple[int, int] = (20_000, 60_000)
    size_range: tuple[int, int] = (1_500_000, 4_500_000)      # bytes
    period_range: tuple[float, float] = (200.0, 1000.0)       # ms


def generate_apps(app_count: int, seed: int, params: WorkloadParams = WorkloadParams()) -> list[App]:
    """Generate ``app_count`` linear-chain applications, deterministically in
    ``seed``.

    Per app the draw order is: chain length, request period, the shared
    service RAM demand, then per-message (size, instructions) starting with
    the user request message. An app's services are sized alike; the demand
    is drawn once per app.
    """
    if app_count < 1:
        raise ConfigurationError(
            f"app_count must be at least 1, got {app_count}", fields=("app_count",)
        )
    rng = random.Random(seed)
    apps: list[App] = []
    for app_id in range(app_count):
        length = rng.randint(*params.services_range)
        period = rng.uniform(*params.period_range)
        ram_demand = rng.randint(*params.ram_range)
        services = tuple(
            Service(app_id=app_id, order=k, ram_demand=ram_demand)
            for k in range(length)
        )
        messages = tuple(
            Message(
                app_id=app_id,
                from_order=k - 1,
                to_order=k,
                size=rng.randint(*params.size_range),
                instructions=rng.randint(*params.instructions_range),
            )
            for k in range(length)
        )
        apps.append(App(id=app_id, request_period=period, services=services, messages=messages))
    return apps


def message_routing_sequence(apps) -> dict[int, dict[int, list[Service]]]:
    """Map each chain order to the services at that order, grouped per app."""
    sequence: dict[int, dict[int, list[Service]]] = {}
    for app in apps:
        for service in app.services:
            sequence.setdefault(service.order, {}).setdefault(app.id, []).append(service)
    return {order: sequence[order] for order in sorted(sequence)}


def avg_message_instructions(app: App) -> float:
    """Mean instruction count over all of the app's messages."""
    return sum(m.instructions for m in app.messages) / len(app.messages)


def assign_users(topology: Topology, apps, seed: int) -> list[UserSource]:
    """Attach one user source per app to a uniformly chosen gateway.

    The source emits at the app's own request period, which keeps the traffic
    rate consistent with the ordering keys used during placement.
    """
    rng = random.Random(seed)
    gateways = sorted(topology.gateways)
    return [
        UserSource(app_id=app.id, gateway=rng.choice(gateways), request_period=app.request_period)
        for app in sorted(apps, key=lambda a: a.id)
    ]
