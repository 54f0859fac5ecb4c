"""Experiment orchestration: config parsing, the strategy/mode/seed sweep,
and report files.

Every run derives its topology, workload, user attachment, and emission
phases from one master seed through labelled sub-seeds
(``sha256("<label>:<master>")``, first 8 bytes), so a single integer
reproduces the whole run. Result CSVs are written through a temporary file
and atomically renamed, and re-running an identical config yields
byte-identical files.
"""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigurationError
from .metrics import (
    RunResult,
    aggregate,
    build_run_result,
    compare_modes,
    runs_csv_lines,
    summary_csv_lines,
    summary_text,
    verdicts_csv_lines,
)
from .placement import STRATEGIES, STRATEGY_ORDER, OrderingMode
from .simulation import SimulationConfig, run_simulation
from .topology import TopologyParams, generate_topology
from .workload import WorkloadParams, assign_users, generate_apps

DEFAULT_DURATION = 8_000.0
DEFAULT_WARMUP = 1_000.0
DEFAULT_SEED_COUNT = 50

_MODE_NAMES = {m.value: m for m in OrderingMode}


@dataclass(frozen=True)
class ExperimentConfig:
    node_count: int = 100
    topology: TopologyParams = TopologyParams()
    app_count: int = 20
    workload: WorkloadParams = WorkloadParams()
    duration: float = DEFAULT_DURATION
    warmup: float = DEFAULT_WARMUP
    seeds: tuple[int, ...] = tuple(range(DEFAULT_SEED_COUNT))
    strategies: tuple[str, ...] = STRATEGY_ORDER
    modes: tuple[OrderingMode, ...] = (OrderingMode.APP_BASED, OrderingMode.SERVICE_BASED)
    out_dir: str = "results"
    draw_threshold: float = 0.01
    jobs: int = 1
    trace: bool = False

    def validate(self) -> None:
        bad: list[str] = []
        if self.node_count < 3:
            bad.append("node_count")
        if self.app_count < 1:
            bad.append("app_count")
        for name, (lo, hi) in (
            ("node_resources", self.topology.ram_range),
            ("node_speed", self.topology.ipt_range),
            ("propagation_delay", self.topology.delay_range),
            ("services_per_app", self.workload.services_range),
            ("module_resources", self.workload.ram_range),
            ("module_instructions", self.workload.instructions_range),
            ("module_message_size", self.workload.size_range),
            ("request_rate", self.workload.period_range),
        ):
            if lo > hi or lo <= 0:
                bad.append(name)
        if self.topology.bandwidth <= 0:
            bad.append("link_bandwidth")
        if self.topology.cloud_bandwidth <= 0:
            bad.append("cloud_bandwidth")
        if not (0 <= self.warmup < self.duration):
            bad.append("warmup" if self.warmup < 0 else "duration")
        if not self.seeds:
            bad.append("seeds")
        if not self.strategies or any(s not in STRATEGIES for s in self.strategies):
            bad.append("strategies")
        if not self.modes:
            bad.append("modes")
        if self.draw_threshold < 0:
            bad.append("draw_threshold")
        if self.jobs < 1:
            bad.append("jobs")
        if bad:
            raise ConfigurationError(
                "invalid configuration field(s): " + ", ".join(bad), fields=bad
            )


@dataclass(frozen=True)
class ExperimentReport:
    results: tuple[RunResult, ...]
    summaries: tuple
    verdicts: tuple
    out_dir: Path
    files: dict[str, Path] = field(default_factory=dict)


def derive_seed(master: int, label: str) -> int:
    """Stable 64-bit sub-seed for one aspect of a run."""
    digest = hashlib.sha256(f"{label}:{master}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


# -- config file --------------------------------------------------------------

_SCENARIO_KEYS = (
    "NUMBER_OF_NODES",
    "NODE_RESOURCES",
    "NODE_SPEED",
    "LINK_BANDWIDTH",
    "PROPAGATION_DELAY",
    "CLOUD_CAPACITY",
    "CLOUD_SPEED",
    "CLOUD_BANDWIDTH",
    "CLOUD_PROPAGATION_DELAY",
    "NUMBER_OF_APPS",
    "NUMBER_OF_SERVICES_p_APP",
    "MODULE_INSTRUCTIONS",
    "MODULE_RESOURCES",
    "MODULE_MESSAGE_SIZE",
    "REQUEST_RATE",
)
_KEY_TO_FIELD = {
    "NUMBER_OF_NODES": "node_count",
    "NODE_RESOURCES": "node_resources",
    "NODE_SPEED": "node_speed",
    "LINK_BANDWIDTH": "link_bandwidth",
    "PROPAGATION_DELAY": "propagation_delay",
    "CLOUD_CAPACITY": "cloud_capacity",
    "CLOUD_SPEED": "cloud_speed",
    "CLOUD_BANDWIDTH": "cloud_bandwidth",
    "CLOUD_PROPAGATION_DELAY": "cloud_propagation_delay",
    "NUMBER_OF_APPS": "app_count",
    "NUMBER_OF_SERVICES_p_APP": "services_per_app",
    "MODULE_INSTRUCTIONS": "module_instructions",
    "MODULE_RESOURCES": "module_resources",
    "MODULE_MESSAGE_SIZE": "module_message_size",
    "REQUEST_RATE": "request_rate",
}
_OPTIONAL_KEYS = (
    "DURATION", "WARMUP", "SEEDS", "STRATEGIES", "MODES", "OUTPUT_DIR",
    "DRAW_THRESHOLD", "JOBS", "TRACE", "DELAY_DEPTH_WEIGHT", "GATEWAY_FLOOR",
)


def _parse_number(text: str) -> float:
    return float(text)


def _parse_range(text: str, integral: bool):
    parts = text.split("-")
    if len(parts) == 1:
        lo = hi = _parse_number(parts[0])
    elif len(parts) == 2:
        lo, hi = _parse_number(parts[0]), _parse_number(parts[1])
    else:
        raise ValueError(f"cannot parse range {text!r}")
    if integral:
        return (int(lo), int(hi))
    return (lo, hi)


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse a ``KEY = value`` scenario file.

    Every scenario key (the parameter-table names such as NUMBER_OF_NODES or
    LINK_BANDWIDTH) must be present; sweep and simulation keys are optional
    and fall back to the defaults. Ranges use the ``lo-hi`` form.
    """
    values: dict[str, str] = {}
    bad: list[str] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"cannot parse config line: {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _SCENARIO_KEYS and key not in _OPTIONAL_KEYS:
            raise ConfigurationError(f"unknown config key: {key}", fields=(key,))
        values[key] = value

    missing = [
        _KEY_TO_FIELD[key] for key in _SCENARIO_KEYS if key not in values
    ]
    if missing:
        raise ConfigurationError(
            "config is missing required field(s): " + ", ".join(missing),
            fields=missing,
        )

    def take(key, parse):
        try:
            return parse(values[key])
        except (ValueError, OverflowError):
            bad.append(_KEY_TO_FIELD.get(key, key.lower()))
            return None

    node_count = take("NUMBER_OF_NODES", lambda v: int(float(v)))
    ram_range = take("NODE_RESOURCES", lambda v: _parse_range(v, True))
    ipt_range = take("NODE_SPEED", lambda v: _parse_range(v, True))
    bandwidth = take("LINK_BANDWIDTH", float)
    delay_range = take("PROPAGATION_DELAY", lambda v: _parse_range(v, False))
    cloud_capacity = values["CLOUD_CAPACITY"].lower()
    if cloud_capacity not in ("inf", "infinity", "∞"):
        bad.append("cloud_capacity")
    cloud_ipt = take("CLOUD_SPEED", lambda v: int(float(v)))
    cloud_bandwidth = take("CLOUD_BANDWIDTH", float)
    cloud_delay = take("CLOUD_PROPAGATION_DELAY", float)
    app_count = take("NUMBER_OF_APPS", lambda v: int(float(v)))
    services_range = take("NUMBER_OF_SERVICES_p_APP", lambda v: _parse_range(v, True))
    instructions_range = take("MODULE_INSTRUCTIONS", lambda v: _parse_range(v, True))
    ram_demand_range = take("MODULE_RESOURCES", lambda v: _parse_range(v, True))
    size_range = take("MODULE_MESSAGE_SIZE", lambda v: _parse_range(v, True))
    period_range = take("REQUEST_RATE", lambda v: _parse_range(v, False))
    if bad:
        raise ConfigurationError(
            "unparsable configuration value(s) for: " + ", ".join(bad), fields=bad
        )

    config = ExperimentConfig(
        node_count=node_count,
        topology=TopologyParams(
            ram_range=ram_range,
            ipt_range=ipt_range,
            bandwidth=bandwidth,
            delay_range=delay_range,
            cloud_ipt=cloud_ipt,
            cloud_bandwidth=cloud_bandwidth,
            cloud_delay=cloud_delay,
        ),
        app_count=app_count,
        workload=WorkloadParams(
            services_range=services_range,
            ram_range=ram_demand_range,
            instructions_range=instructions_range,
            size_range=size_range,
            period_range=period_range,
        ),
    )
    if "DELAY_DEPTH_WEIGHT" in values:
        config = replace(config, topology=replace(
            config.topology, delay_depth_weight=float(values["DELAY_DEPTH_WEIGHT"])))
    if "GATEWAY_FLOOR" in values:
        config = replace(config, topology=replace(
            config.topology, gateway_floor=float(values["GATEWAY_FLOOR"])))
    if "DURATION" in values:
        config = replace(config, duration=float(values["DURATION"]))
    if "WARMUP" in values:
        config = replace(config, warmup=float(values["WARMUP"]))
    if "SEEDS" in values:
        config = replace(config, seeds=parse_seeds(values["SEEDS"]))
    if "STRATEGIES" in values:
        config = replace(config, strategies=tuple(
            s.strip() for s in values["STRATEGIES"].split(",") if s.strip()))
    if "MODES" in values:
        config = replace(config, modes=parse_modes(values["MODES"]))
    if "OUTPUT_DIR" in values:
        config = replace(config, out_dir=values["OUTPUT_DIR"])
    if "DRAW_THRESHOLD" in values:
        config = replace(config, draw_threshold=float(values["DRAW_THRESHOLD"]))
    if "JOBS" in values:
        config = replace(config, jobs=int(values["JOBS"]))
    if "TRACE" in values:
        config = replace(config, trace=values["TRACE"].lower() in ("1", "true", "yes"))
    return config


def parse_seeds(text: str) -> tuple[int, ...]:
    """A count (``50`` means seeds 0..49) or an explicit comma list."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if len(parts) == 1 and "," not in text:
        return tuple(range(int(parts[0])))
    return tuple(int(p) for p in parts)


def parse_modes(text: str) -> tuple[OrderingMode, ...]:
    modes = []
    for part in text.split(","):
        name = part.strip()
        if not name:
            continue
        if name not in _MODE_NAMES:
            raise ConfigurationError(
                f"unknown ordering mode {name!r} (expected app_based/service_based)",
                fields=("modes",),
            )
        modes.append(_MODE_NAMES[name])
    return tuple(modes)


# -- sweep execution -----------------------------------------------------------


def run_seed(config: ExperimentConfig, master_seed: int) -> list[RunResult]:
    """Run every configured strategy and mode against one seed's scenario."""
    topo = generate_topology(
        config.node_count, derive_seed(master_seed, "topology"), config.topology
    )
    apps = generate_apps(
        config.app_count, derive_seed(master_seed, "workload"), config.workload
    )
    users = assign_users(topo, apps, derive_seed(master_seed, "users"))
    sim_config = SimulationConfig(
        duration=config.duration,
        warmup=config.warmup,
        seed=derive_seed(master_seed, "phases"),
    )
    results = []
    for strategy in config.strategies:
        for mode in config.modes:
            plan = STRATEGIES[strategy](topo, apps, mode)
            trace_handle = None
            if config.trace:
                trace_dir = Path(config.out_dir) / "traces"
                trace_dir.mkdir(parents=True, exist_ok=True)
                trace_handle = open(
                    trace_dir / f"{strategy}_{mode.value}_{master_seed}.log",
                    "w", encoding="utf-8",
                )
            try:
                samples = run_simulation(topo, apps, users, plan, sim_config,
                                         trace=trace_handle)
            finally:
                if trace_handle is not None:
                    trace_handle.close()
            results.append(build_run_result(strategy, mode, master_seed,
                                            samples, plan, topo))
    return results


def _seed_worker(args) -> list[RunResult]:
    config, master_seed = args
    return run_seed(config, master_seed)


def _write_atomic(path: Path, content: str) -> None:
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
    tmp.write_text(content, encoding="utf-8")
    os.replace(tmp, path)


def run_experiment(config: ExperimentConfig, progress=None) -> ExperimentReport:
    """Execute the sweep, aggregate, and write the report files.

    ``progress`` is an optional callable receiving one line per finished seed.
    """
    config.validate()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    all_results: list[RunResult] = []
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            for seed, results in zip(
                config.seeds,
                pool.map(_seed_worker, [(config, s) for s in config.seeds]),
            ):
                all_results.extend(results)
                if progress:
                    progress(f"seed {seed}: {len(results)} runs done")
    else:
        for seed in config.seeds:
            results = run_seed(config, seed)
            all_results.extend(results)
            if progress:
                progress(f"seed {seed}: {len(results)} runs done")

    # Deterministic report order regardless of execution interleaving.
    all_results.sort(key=lambda r: (config.strategies.index(r.strategy),
                                    r.mode.value, config.seeds.index(r.seed)))
    summaries = aggregate(all_results)
    verdicts = (
        compare_modes(summaries, config.draw_threshold)
        if len(config.modes) == 2 else []
    )

    files = {
        "runs": out_dir / "runs.csv",
        "summary": out_dir / "summary.csv",
        "verdicts": out_dir / "verdicts.csv",
        "report": out_dir / "summary.txt",
    }
    _write_atomic(files["runs"], "\n".join(runs_csv_lines(all_results)) + "\n")
    _write_atomic(files["summary"], "\n".join(summary_csv_lines(summaries)) + "\n")
    _write_atomic(files["verdicts"], "\n".join(verdicts_csv_lines(verdicts)) + "\n")
    _write_atomic(files["report"], summary_text(summaries, verdicts))
    return ExperimentReport(
        results=tuple(all_results),
        summaries=tuple(summaries),
        verdicts=tuple(verdicts),
        out_dir=out_dir,
        files=files,
    )
