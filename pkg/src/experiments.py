#!/usr/bin/env python3
"""
Experiment orchestration for the run and sweep commands

Replications run in worker processes; results are collected in seed order,
so artifacts do not depend on the worker count.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

import detection
from artifacts import ArtifactWriter
from config_loader import ConfigError, ExperimentConfig
from detection import SensingContext
from hedonic import form_partition, verify_nash_stable
from sim import SLOT_COLUMNS, WINDOW_COLUMNS, formation_generator, run_scenario
from utils import worker_count


logger = logging.getLogger("coalspec.experiments")

RUN_SUMMARY_KEYS = (
    "throughput_bps", "energy_j", "energy_efficiency", "switch_count",
    "switches_per_minute", "md_rate", "stability_breaks", "avg_coalition_fa",
    "mean_rate_dissatisfied", "mean_efficiency_dissatisfied", "fa_computations",
)

SPLIT_COLUMNS = ["point", "snr_1", "snr_2", "fa_and", "fa_or"]
N_SWEEP_COLUMNS = [
    "num_channels", "seed", "t_converge", "switch_count", "fa_computation_count",
    "formula_fa_count", "stable",
]
V_SWEEP_COLUMNS = [
    "num_channels", "speed_mps", "seed", "switches_per_minute", "switch_count",
    "stability_breaks", "throughput_bps",
]


@dataclass
class ExperimentResult:
    """Rows and documents produced by one command"""
    rows: List[Dict[str, Any]] = field(default_factory=list)
    slot_rows: List[Dict[str, Any]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    traces: Dict[str, Any] = field(default_factory=dict)
    files: List[Path] = field(default_factory=list)


def mean_std(values: Sequence[float]) -> Dict[str, float]:
    """Mean and sample standard deviation (0 for a single value)"""
    data = np.asarray(values, dtype=float)
    if data.size == 0:
        return {"mean": 0.0, "std": 0.0, "n": 0}
    std = float(np.std(data, ddof=1)) if data.size > 1 else 0.0
    return {"mean": float(np.mean(data)), "std": std, "n": int(data.size)}


def _map(fn: Callable, jobs: List[Tuple]) -> List[Any]:
    """Run jobs in worker processes, results in job order"""
    workers = worker_count(len(jobs))
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    logger.info(f"Running {len(jobs)} jobs on {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, *zip(*jobs)))


def _config(config_dict: Dict[str, Any], base_dir: str) -> ExperimentConfig:
    return ExperimentConfig(config_dict, base_dir=Path(base_dir))


# ----------------------------------------------------------------------------
# Worker jobs (module level so they pickle)
# ----------------------------------------------------------------------------

def _run_seed_job(config_dict: Dict[str, Any], base_dir: str, seed: int) -> Dict[str, Any]:
    config = _config(config_dict, base_dir)
    scenario = config.build_scenario(seed)
    metrics = run_scenario(
        scenario,
        events=config.events,
        speed_mps=config.speed_mps,
        horizon=config.horizon,
        seed=seed,
        window_slots=config.window_slots,
    )
    return {
        "seed": seed,
        "summary": metrics.summary(),
        "windows": metrics.window_rows(),
        "slots": metrics.slot_rows() if config.emit("per_slot_csv") else [],
        "trace": {
            "event_slots": metrics.event_slots,
            "phases": metrics.formation_phases,
            "formation": metrics.formation_trace,
        },
        "expected_rates": {str(m): r for m, r in sorted(metrics.expected_rates.items())},
        "standalone_rates": {str(m): r for m, r in sorted(metrics.standalone_rates.items())},
    }


def _formation_job(config_dict: Dict[str, Any], base_dir: str, num_channels: int, seed: int) -> Dict[str, Any]:
    config = _config(config_dict, base_dir)
    scenario = config.build_scenario(seed, num_channels=num_channels)
    partition, _, trace = form_partition(scenario, rng=formation_generator(seed))
    stable = verify_nash_stable(partition, scenario).stable
    return {
        "row": {
            "num_channels": num_channels,
            "seed": seed,
            "t_converge": trace.t_converge,
            "switch_count": len(trace.switch_slots),
            "fa_computation_count": trace.fa_computation_count,
            "formula_fa_count": trace.formula_fa_count,
            "stable": stable,
        },
        "trace": trace.to_dict(),
    }


def _mobility_job(
    config_dict: Dict[str, Any],
    base_dir: str,
    num_channels: int,
    speed_mps: float,
    seed: int,
) -> Dict[str, Any]:
    config = _config(config_dict, base_dir)
    scenario = config.build_scenario(seed, num_channels=num_channels)
    metrics = run_scenario(
        scenario,
        events=config.events,
        speed_mps=speed_mps,
        horizon=config.horizon,
        seed=seed,
        window_slots=config.window_slots,
    )
    return {
        "num_channels": num_channels,
        "speed_mps": speed_mps,
        "seed": seed,
        "switches_per_minute": metrics.switches_per_minute(),
        "switch_count": metrics.switch_count,
        "stability_breaks": metrics.stability_breaks,
        "throughput_bps": metrics.summary()["throughput_bps"],
    }


# ----------------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------------

def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Simulate every seed and aggregate mean +/- std across seeds"""
    config_dict = config.to_dict()
    jobs = [(config_dict, str(config.base_dir), seed) for seed in config.seeds]
    outputs = _map(_run_seed_job, jobs)

    result = ExperimentResult()
    for output in outputs:
        for row in output["windows"]:
            result.rows.append({"seed": output["seed"], **row})
        for row in output["slots"]:
            result.slot_rows.append({"seed": output["seed"], **row})
        result.traces[str(output["seed"])] = output["trace"]

    result.summary = {
        "name": config.name,
        "command": "run",
        "seeds": config.seeds,
        "horizon": config.horizon,
        "aggregate": {
            key: mean_std([o["summary"][key] for o in outputs]) for key in RUN_SUMMARY_KEYS
        },
        "per_seed": {
            str(o["seed"]): {
                **o["summary"],
                "expected_rates": o["expected_rates"],
                "standalone_rates": o["standalone_rates"],
            }
            for o in outputs
        },
    }
    return result


def split_sweep(config: ExperimentConfig) -> ExperimentResult:
    """AND/OR FA of a two-member coalition over SNR splits; deterministic, run once"""
    sweep = config.sweep
    mean_snr = float(sweep["mean_snr"])
    md = float(sweep["md_coalition"])
    num_samples = int(sweep.get("num_samples", config.radio_params().num_samples))
    points = int(sweep.get("points", 101))

    curve = detection.fa_split_sweep(mean_snr, md, num_samples, points)
    result = ExperimentResult()
    result.rows = [
        {"point": i, "snr_1": p.snr_1, "snr_2": p.snr_2, "fa_and": p.fa_and, "fa_or": p.fa_or}
        for i, p in enumerate(curve)
    ]
    ctx = SensingContext(md_budget=md, population=2, num_samples=num_samples)
    md_ok, threshold_ok = detection.quasiconcavity_conditions(ctx, 2, [p.snr_1 for p in curve], md_coalition=md)
    result.summary = {
        "name": config.name,
        "command": "sweep",
        "variable": "split",
        "mean_snr": mean_snr,
        "md_coalition": md,
        "num_samples": num_samples,
        "points": points,
        "and_argmax": int(np.argmax([p.fa_and for p in curve])),
        "or_argmin": int(np.argmin([p.fa_or for p in curve])),
        "center": points // 2,
        "md_condition": md_ok,
        "threshold_condition": threshold_ok,
    }
    return result


def channel_sweep(config: ExperimentConfig) -> ExperimentResult:
    """Formation complexity versus the number of channels"""
    values = config.sweep["values"]
    config_dict = config.to_dict()
    jobs = [(config_dict, str(config.base_dir), n, seed) for n in values for seed in config.seeds]
    outputs = _map(_formation_job, jobs)

    result = ExperimentResult()
    result.rows = [o["row"] for o in outputs]
    result.traces = {f"N={o['row']['num_channels']},seed={o['row']['seed']}": o["trace"] for o in outputs}
    result.summary = {
        "name": config.name,
        "command": "sweep",
        "variable": "N",
        "seeds": config.seeds,
        "points": {
            str(n): {
                key: mean_std([r[key] for r in result.rows if r["num_channels"] == n])
                for key in ("t_converge", "switch_count", "fa_computation_count")
            }
            for n in values
        },
        "all_stable": all(r["stable"] for r in result.rows),
    }
    return result


def speed_sweep(config: ExperimentConfig) -> ExperimentResult:
    """Switch frequency versus the number of channels for each speed"""
    speeds = config.sweep["values"]
    channels = config.sweep["channels"]
    config_dict = config.to_dict()
    jobs = [
        (config_dict, str(config.base_dir), n, float(v), seed)
        for n in channels for v in speeds for seed in config.seeds
    ]
    result = ExperimentResult()
    result.rows = _map(_mobility_job, jobs)
    result.summary = {
        "name": config.name,
        "command": "sweep",
        "variable": "V",
        "seeds": config.seeds,
        "horizon": config.horizon,
        "points": {
            f"N={n},V={float(v)}": mean_std([
                r["switches_per_minute"] for r in result.rows
                if r["num_channels"] == n and r["speed_mps"] == float(v)
            ])
            for n in channels for v in speeds
        },
    }
    return result


SWEEPS: Dict[str, Tuple[Callable[[ExperimentConfig], ExperimentResult], List[str]]] = {
    "split": (split_sweep, SPLIT_COLUMNS),
    "N": (channel_sweep, N_SWEEP_COLUMNS),
    "V": (speed_sweep, V_SWEEP_COLUMNS),
}


def single_point(config: ExperimentConfig) -> Optional[ExperimentConfig]:
    """The run config of an N or V sweep with exactly one point, else None"""
    sweep = config.sweep
    if sweep["variable"] == "N" and len(sweep["values"]) == 1:
        return config.with_overrides(num_channels=sweep["values"][0])
    if sweep["variable"] == "V" and len(sweep["values"]) == 1 and len(sweep["channels"]) == 1:
        return config.with_overrides(num_channels=sweep["channels"][0], speed_mps=sweep["values"][0])
    return None


def run_sweep(config: ExperimentConfig) -> Tuple[ExperimentResult, List[str]]:
    """
    Dispatch on the sweep variable

    A one-point N or V sweep is simulated like the run command and has its
    output shape.

    Raises:
        ConfigError: If the config has no sweep section
    """
    if not config.sweep:
        raise ConfigError("sweep command needs a sweep section in the config")
    point = single_point(config)
    if point is not None:
        logger.info(f"Single-point {config.sweep['variable']} sweep, running as an experiment")
        result = run_experiment(point)
        result.summary["command"] = "sweep"
        return result, run_columns()
    fn, columns = SWEEPS[config.sweep["variable"]]
    return fn(config), columns


def write_artifacts(
    config: ExperimentConfig,
    result: ExperimentResult,
    columns: List[str],
    writer: ArtifactWriter,
) -> List[Path]:
    """Write metrics.csv, summary.json and traces.json as the emit flags ask"""
    files = [writer.write_csv("metrics.csv", columns, result.rows)]
    if result.slot_rows:
        files.append(writer.write_csv("slots.csv", ["seed"] + SLOT_COLUMNS, result.slot_rows))
    if config.emit("summary_json"):
        files.append(writer.write_json("summary.json", result.summary))
    if config.emit("formation_trace") and result.traces:
        files.append(writer.write_json("traces.json", {"traces": result.traces}))
    result.files = files
    return files


def run_columns() -> List[str]:
    return ["seed"] + WINDOW_COLUMNS
