"""Aggregation of runs into latency summaries, used-node shares, and
mode-versus-mode verdicts, plus the fixed-format CSV outputs."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import MissingDataError
from .placement import OrderingMode, PlacementPlan, STRATEGY_ORDER
from .topology import Topology

MODE_ORDER = (OrderingMode.APP_BASED, OrderingMode.SERVICE_BASED)


@dataclass(frozen=True)
class RunResult:
    strategy: str
    mode: OrderingMode
    seed: int
    per_app_mean_latency: dict[int, float]
    overall_mean_latency: float     # mean over requests, not over apps
    used_node_fraction: float       # in [0, 1], cloud counted like any node


@dataclass(frozen=True)
class GroupSummary:
    strategy: str
    mode: OrderingMode
    runs: int
    mean_latency: float
    std_latency: float              # sample standard deviation across seeds
    per_app_mean_latency: dict[int, float]
    used_pct: float


@dataclass(frozen=True)
class ComparisonVerdict:
    strategy: str
    winner: str                     # "service_based", "app_based", or "draw"
    delta: float                    # |mean(app) - mean(service)| in ms


def used_node_percentage(plan: PlacementPlan, topology: Topology) -> float:
    """Share of all nodes (cloud included) hosting at least one service."""
    return 100.0 * len(plan.used_nodes()) / len(topology.nodes)


def build_run_result(strategy: str, mode: OrderingMode, seed: int, samples,
                     plan: PlacementPlan, topology: Topology) -> RunResult:
    if not samples:
        raise MissingDataError(
            f"simulation for {strategy}/{mode.value}/seed {seed} produced no samples"
        )
    per_app_totals: dict[int, list[float]] = {}
    for sample in samples:
        per_app_totals.setdefault(sample.app_id, []).append(sample.latency)
    per_app = {
        app_id: sum(vals) / len(vals)
        for app_id, vals in sorted(per_app_totals.items())
    }
    overall = sum(s.latency for s in samples) / len(samples)
    return RunResult(
        strategy=strategy,
        mode=mode,
        seed=seed,
        per_app_mean_latency=per_app,
        overall_mean_latency=overall,
        used_node_fraction=len(plan.used_nodes()) / len(topology.nodes),
    )


def _strategy_rank(name: str):
    try:
        return (STRATEGY_ORDER.index(name), name)
    except ValueError:
        return (len(STRATEGY_ORDER), name)


def _sample_std(values) -> float:
    n = len(values)
    if n < 2:
        return 0.0
    mean = sum(values) / n
    return math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1))


def aggregate(results) -> list[GroupSummary]:
    """Summarize runs per (strategy, mode): mean/std of the overall latency
    across seeds, per-app mean of means, and mean used-node percentage."""
    results = list(results)
    if not results:
        raise MissingDataError("no run results to aggregate")
    groups: dict[tuple[str, OrderingMode], list[RunResult]] = {}
    for result in results:
        groups.setdefault((result.strategy, result.mode), []).append(result)
    summaries = []
    for (strategy, mode) in sorted(groups, key=lambda k: (_strategy_rank(k[0]), MODE_ORDER.index(k[1]))):
        runs = sorted(groups[(strategy, mode)], key=lambda r: r.seed)
        overall = [r.overall_mean_latency for r in runs]
        app_ids = sorted({app_id for r in runs for app_id in r.per_app_mean_latency})
        per_app = {}
        for app_id in app_ids:
            vals = [r.per_app_mean_latency[app_id] for r in runs
                    if app_id in r.per_app_mean_latency]
            per_app[app_id] = sum(vals) / len(vals)
        summaries.append(GroupSummary(
            strategy=strategy,
            mode=mode,
            runs=len(runs),
            mean_latency=sum(overall) / len(overall),
            std_latency=_sample_std(overall),
            per_app_mean_latency=per_app,
            used_pct=sum(100.0 * r.used_node_fraction for r in runs) / len(runs),
        ))
    return summaries


def compare_modes(summaries, draw_threshold: float = 0.01) -> list[ComparisonVerdict]:
    """Per strategy, declare the lower-latency ordering mode or a draw.

    A draw is declared when the absolute gap does not exceed
    ``draw_threshold`` of the larger mean.
    """
    by_strategy: dict[str, dict[OrderingMode, GroupSummary]] = {}
    for summary in summaries:
        by_strategy.setdefault(summary.strategy, {})[summary.mode] = summary
    verdicts = []
    for strategy in sorted(by_strategy, key=_strategy_rank):
        modes = by_strategy[strategy]
        missing = [m.value for m in MODE_ORDER if m not in modes]
        if missing:
            raise MissingDataError(
                f"strategy {strategy} lacks results for mode(s): {', '.join(missing)}"
            )
        app_mean = modes[OrderingMode.APP_BASED].mean_latency
        service_mean = modes[OrderingMode.SERVICE_BASED].mean_latency
        delta = abs(app_mean - service_mean)
        if delta <= draw_threshold * max(app_mean, service_mean):
            winner = "draw"
        elif service_mean < app_mean:
            winner = "service_based"
        else:
            winner = "app_based"
        verdicts.append(ComparisonVerdict(strategy=strategy, winner=winner, delta=delta))
    return verdicts


# -- CSV output ---------------------------------------------------------------


def _f(value: float) -> str:
    return f"{value:.6f}"


def runs_csv_lines(results) -> list[str]:
    lines = ["strategy,mode,seed,app_id,mean_latency_ms,used_pct"]
    ordered = sorted(results, key=lambda r: (_strategy_rank(r.strategy),
                                             MODE_ORDER.index(r.mode), r.seed))
    for r in ordered:
        used = _f(100.0 * r.used_node_fraction)
        for app_id in sorted(r.per_app_mean_latency):
            lines.append(f"{r.strategy},{r.mode.value},{r.seed},{app_id},"
                         f"{_f(r.per_app_mean_latency[app_id])},{used}")
    return lines


def summary_csv_lines(summaries) -> list[str]:
    lines = ["strategy,mode,mean_ms,std_ms,used_pct"]
    for s in summaries:
        lines.append(f"{s.strategy},{s.mode.value},{_f(s.mean_latency)},"
                     f"{_f(s.std_latency)},{_f(s.used_pct)}")
    return lines


def verdicts_csv_lines(verdicts) -> list[str]:
    lines = ["strategy,winner,delta_ms"]
    for v in verdicts:
        lines.append(f"{v.strategy},{v.winner},{_f(v.delta)}")
    return lines


def summary_text(summaries, verdicts) -> str:
    """Human-readable digest: per-configuration table plus verdicts."""
    out = ["configuration summary (latency in ms)", ""]
    header = f"{'strategy':<16} {'mode':<14} {'runs':>4} {'mean':>12} {'std':>12} {'used %':>8}"
    out.append(header)
    out.append("-" * len(header))
    for s in summaries:
        out.append(f"{s.strategy:<16} {s.mode.value:<14} {s.runs:>4} "
                   f"{s.mean_latency:>12.3f} {s.std_latency:>12.3f} {s.used_pct:>8.2f}")
    out.append("")
    out.append("lower-latency ordering per strategy")
    out.append("")
    for v in verdicts:
        out.append(f"{v.strategy:<16} {v.winner:<14} delta={v.delta:.3f} ms")
    return "\n".join(out) + "\n"
