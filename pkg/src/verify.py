#!/usr/bin/env python3
"""
Property suite behind the verify command

Each check enumerates or samples instances and compares the library against
an independent evaluation. The first violation of a check is kept as its
counterexample.
"""
import json
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from scipy import special

import detection
from bargaining import fnbs_1x, nbs_0x
from coalition import (
    BottomPartition,
    CoalitionValueInputs,
    check_characteristic_form_0x,
    direct_externality,
    externality_delta,
    externality_weight,
    partition_closed_form_1x,
    set_partitions,
    sum_over_partition_1x,
)
from config_loader import ExperimentConfig
from detection import SensingContext
from experiments import speed_sweep
from hedonic import form_partition, verify_nash_stable
from network_model import data_rate, generate_scenario
from sim import Simulator, expected_rates, formation_generator, noncooperative_baseline, standalone_baseline
from utils import truncate_text


logger = logging.getLogger("coalspec.verify")

TOLERANCE = 1e-12
TREND_SPEEDS = (1.0, 2.0, 4.0)
TREND_CHANNELS = (3, 5, 7)


def _negated_weight(*args) -> float:
    return -externality_weight(*args)


MUTATIONS: Dict[str, Dict[str, Callable]] = {
    "externality-sign": {"weight_fn": _negated_weight},
}


@dataclass
class CheckResult:
    name: str
    passed: bool
    cases: int
    seconds: float = 0.0
    detail: str = ""
    counterexample: Optional[Dict[str, Any]] = None
    skipped: bool = False


@dataclass
class VerifyReport:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def table(self) -> str:
        lines = [f"{'check':<28} {'result':<8} {'cases':>8} {'time':>8}  detail", "-" * 78]
        for c in self.checks:
            mark = "⏭ skip" if c.skipped else "✅ pass" if c.passed else "❌ FAIL"
            lines.append(
                f"{c.name:<28} {mark:<8} {c.cases:>8} {c.seconds:>7.2f}s  {truncate_text(c.detail, 40)}"
            )
        return "\n".join(lines)

    def counterexamples_json(self) -> str:
        return json.dumps(
            {c.name: c.counterexample for c in self.failures()}, indent=2, default=str
        )


def _random_partition(rng: np.random.Generator, players: int, blocks: int) -> BottomPartition:
    order = rng.permutation(players)
    labels = np.empty(players, dtype=int)
    labels[order[:blocks]] = np.arange(blocks)
    labels[order[blocks:]] = rng.integers(blocks, size=players - blocks)
    groups = [frozenset(int(m) for m in np.flatnonzero(labels == b)) for b in range(blocks)]
    return BottomPartition(channel=0, blocks=tuple(groups))


def _member_inputs(rng: np.random.Generator, players: int, beta: Optional[float] = None) -> CoalitionValueInputs:
    fas = {m: float(rng.uniform(0.0, 1.0)) for m in range(players)}
    return CoalitionValueInputs.from_member_fa(beta if beta is not None else float(rng.uniform(0.05, 1.0)), fas)


# ----------------------------------------------------------------------------
# Checks
# ----------------------------------------------------------------------------

def check_md_conservation(quick: bool = False) -> CheckResult:
    """Every partition of |S| SUs spends exactly the channel MD budget"""
    result = CheckResult(name="md_conservation", passed=True, cases=0)
    for budget in (1e-4, 0.01, 0.1):
        for size in range(1, 7):
            ctx = SensingContext(md_budget=budget, population=size, num_samples=5)
            for blocks in set_partitions(range(size)):
                result.cases += 1
                value = detection.integrated_md(ctx, [len(b) for b in blocks])
                if abs(value - budget) > TOLERANCE and result.passed:
                    result.passed = False
                    result.counterexample = {
                        "md_budget": budget,
                        "partition": [sorted(b) for b in blocks],
                        "integrated_md": value,
                    }
    result.detail = "all partitions of 1-6 SUs"
    return result


def check_characteristic_form(quick: bool = False) -> CheckResult:
    """0/X values ignore outsiders' organization; superadditive; grand coalition efficient"""
    rng = np.random.default_rng(2001)
    draws = 50 if quick else 1000
    result = CheckResult(name="characteristic_form_0x", passed=True, cases=0)
    for _ in range(draws):
        players = int(rng.integers(4, 7))
        report = check_characteristic_form_0x(range(players), _member_inputs(rng, players))
        result.cases += 1
        if not report.passed and result.passed:
            result.passed = False
            result.counterexample = report.counterexample
    result.detail = f"{draws} random draws of 4-6 SUs"
    return result


def check_equal_efficiency(quick: bool = False) -> CheckResult:
    """Every 1/X partition of 5 SUs uses the slot with the same total value"""
    rng = np.random.default_rng(2002)
    draws = 20 if quick else 1000
    partitions = [BottomPartition(channel=0, blocks=b) for b in set_partitions(range(5))]
    result = CheckResult(name="equal_efficiency_1x", passed=True, cases=0)
    for _ in range(draws):
        inputs = _member_inputs(rng, 5)
        for partition in partitions:
            result.cases += 1
            total = sum_over_partition_1x(partition, inputs)
            closed = partition_closed_form_1x(partition, inputs)
            if abs(total - closed) > TOLERANCE and result.passed:
                result.passed = False
                result.counterexample = {
                    "partition": [sorted(b) for b in partition.blocks],
                    "fas": {m: inputs.fa(frozenset([m])) for m in range(5)},
                    "beta": inputs.beta,
                    "sum": total,
                    "closed_form": closed,
                }
    result.detail = f"52 partitions x {draws} draws"
    return result


def check_externality(quick: bool = False, weight_fn: Callable = externality_weight) -> CheckResult:
    """Closed-form merger externality matches direct subtraction and is nonnegative"""
    rng = np.random.default_rng(2003)
    draws = 100 if quick else 1000
    result = CheckResult(name="externality", passed=True, cases=0)
    for _ in range(draws):
        blocks = int(rng.integers(3, 6))
        players = blocks + int(rng.integers(0, 4))
        partition = _random_partition(rng, players, blocks)
        inputs = _member_inputs(rng, players)
        picks = rng.choice(blocks, size=3, replace=False)
        target, left, right = (partition.blocks[int(i)] for i in picks)

        closed = externality_delta(target, left, right, partition, inputs, weight_fn=weight_fn)
        direct = direct_externality(target, left, right, partition, inputs)
        result.cases += 1
        if (abs(closed - direct) > TOLERANCE or closed < -1e-15) and result.passed:
            result.passed = False
            result.counterexample = {
                "partition": [sorted(b) for b in partition.blocks],
                "target": sorted(target),
                "left": sorted(left),
                "right": sorted(right),
                "fas": {m: inputs.fa(frozenset([m])) for m in range(players)},
                "beta": inputs.beta,
                "closed_form": closed,
                "direct": direct,
            }
    result.detail = f"{draws} random 3-5 block instances"
    return result


def check_split_sweep(quick: bool = False) -> CheckResult:
    """Two-member FA over SNR splits: AND peaks and OR bottoms out at the equal split"""
    curve = detection.fa_split_sweep(mean_snr=5.0, md_coalition=1e-4, num_samples=5, points=101)
    fa_and = [p.fa_and for p in curve]
    fa_or = [p.fa_or for p in curve]
    center = len(curve) // 2
    ctx = SensingContext(md_budget=1e-4, population=2, num_samples=5)
    conditions = detection.quasiconcavity_conditions(ctx, 2, [p.snr_1 for p in curve], md_coalition=1e-4)

    and_peak = int(np.argmax(fa_and))
    or_floor = int(np.argmin(fa_or))
    extremes = fa_and[0] < fa_or[0] and fa_and[-1] < fa_or[-1]
    passed = and_peak == center and or_floor == center and extremes
    result = CheckResult(
        name="split_sweep",
        passed=passed,
        cases=len(curve),
        detail=f"AND argmax {and_peak}, OR argmin {or_floor}, conditions {conditions}",
    )
    if not passed:
        result.counterexample = {
            "conditions": list(conditions),
            "and_argmax": and_peak,
            "or_argmin": or_floor,
            "extremes_ordered": extremes,
        }
    return result


def check_bargaining(quick: bool = False) -> CheckResult:
    """NBS budget balance, individual rationality, equal surplus, monotonicity; fNBS sum"""
    rng = np.random.default_rng(2004)
    draws = 20 if quick else 200
    result = CheckResult(name="bargaining", passed=True, cases=0)

    def fail(detail: Dict[str, Any]):
        if result.passed:
            result.passed = False
            result.counterexample = detail

    for _ in range(draws):
        players = int(rng.integers(1, 7))
        members = list(range(players))
        fas = {m: float(rng.uniform(0.0, 1.0)) for m in members}
        beta = float(rng.uniform(0.05, 1.0))
        inputs = CoalitionValueInputs.from_member_fa(beta, fas)
        result.cases += 1

        nbs = nbs_0x(members, 0, inputs)
        surplus = [nbs.payoffs[m] - nbs.disagreement.values[m] for m in members]
        if abs(nbs.total - nbs.coalition_value) > TOLERANCE:
            fail({"property": "budget_balance", "fas": fas, "beta": beta, "total": nbs.total})
        if min(surplus) < -TOLERANCE:
            fail({"property": "individual_rationality", "fas": fas, "beta": beta, "surplus": surplus})
        if max(surplus) - min(surplus) > TOLERANCE:
            fail({"property": "equal_surplus", "fas": fas, "beta": beta, "surplus": surplus})

        m = int(rng.integers(players))
        better = dict(fas)
        better[m] = fas[m] * float(rng.uniform(0.0, 1.0))
        improved = nbs_0x(members, 0, CoalitionValueInputs.from_member_fa(beta, better))
        if improved.payoffs[m] < nbs.payoffs[m] - TOLERANCE:
            fail({"property": "contribution_monotonicity", "fas": fas, "improved_fas": better, "su": m})

        fine = fnbs_1x(members, 0, inputs)
        closed = beta * (1.0 - math.prod(fas.values()))
        if abs(fine.total - closed) > TOLERANCE:
            fail({"property": "fnbs_sum", "fas": fas, "beta": beta, "total": fine.total, "closed_form": closed})
    result.detail = f"{draws} random coalitions of 1-6 SUs"
    return result


def check_stability(quick: bool = False) -> CheckResult:
    """Formation converges to a Nash-stable partition within the switch bounds"""
    seeds = range(10 if quick else 100)
    result = CheckResult(name="stability", passed=True, cases=0)
    worst = 0
    for seed in seeds:
        scenario = generate_scenario(num_sus=10, num_channels=5, seed=seed)
        with detection.count_fa_computations() as tally:
            partition, _, trace = form_partition(scenario, rng=formation_generator(seed))
        switches = len(trace.switch_slots)
        worst = max(worst, switches)
        report = verify_nash_stable(partition, scenario)
        result.cases += 1
        counted = tally.count == trace.fa_computation_count == trace.formula_fa_count
        if (not report.stable or switches > min(5 ** 10, 200) or not counted) and result.passed:
            result.passed = False
            result.counterexample = {
                "seed": seed,
                "stable": report.stable,
                "move": report.counterexample.to_dict() if report.counterexample else None,
                "switches": switches,
                "fa_tally": tally.count,
                "trace_fa_count": trace.fa_computation_count,
                "formula_fa_count": trace.formula_fa_count,
            }
    result.detail = f"M=10 N=5, max {worst} switches"
    return result


def check_satisfaction(quick: bool = False) -> CheckResult:
    """No SU earns less in its coalition than operating alone on its channel"""
    seeds = range(5 if quick else 20)
    result = CheckResult(name="satisfaction", passed=True, cases=0)
    below_standalone = 0
    for seed in seeds:
        scenario = generate_scenario(num_sus=10, num_channels=5, seed=seed)
        partition, allocations, _ = form_partition(scenario, rng=formation_generator(seed))
        game = expected_rates(scenario, partition, allocations)
        alone = noncooperative_baseline(scenario, partition, allocations)
        empty_network = standalone_baseline(scenario)
        below_standalone += sum(1 for m in game if game[m] < empty_network[m])
        for m in game:
            result.cases += 1
            if game[m] < alone[m] * (1.0 - TOLERANCE) and result.passed:
                result.passed = False
                result.counterexample = {"seed": seed, "su": m, "game_rate": game[m], "alone_rate": alone[m]}
    result.detail = f"{below_standalone} below empty-network rate"
    return result


def check_monte_carlo(quick: bool = False) -> CheckResult:
    """Long-run per-SU throughput and PU miss rate agree with their expectations"""
    horizon = 5000 if quick else 50000
    scenario = generate_scenario(num_sus=10, num_channels=5, seed=7)
    simulator = Simulator(scenario, seed=7, window_slots=horizon)
    metrics = simulator.run(horizon)
    radio = scenario.radio
    duty = radio.tx_s / radio.slot_s
    # family-wise level of a single 3-sigma test
    z_family = float(-special.ndtri(2.0 * special.ndtr(-3.0) / (2.0 * scenario.num_sus)))

    result = CheckResult(name="monte_carlo", passed=True, cases=0)
    for m, n in enumerate(simulator.formation.partition.assignment):
        result.cases += 1
        # one coalition per channel: SU m delivers in a slot with probability a_m
        p = simulator.allocations[n].payoffs[m]
        peak = data_rate(scenario, m, n) * duty
        sigma = math.sqrt(max(p * (1.0 - p), 0.0) / horizon) * peak
        realized = metrics.su_rate(m)
        if abs(realized - p * peak) > z_family * sigma + 1e-9 and result.passed:
            result.passed = False
            result.counterexample = {"su": m, "realized": realized, "expected": p * peak, "sigma": sigma}

    busy = sum(metrics.busy_slots.values())
    md_sigma = math.sqrt(radio.md_budget * (1.0 - radio.md_budget) / max(busy, 1))
    result.cases += 1
    if abs(metrics.md_rate() - radio.md_budget) > 3.0 * md_sigma and result.passed:
        result.passed = False
        result.counterexample = {"md_rate": metrics.md_rate(), "md_budget": radio.md_budget, "busy_slots": busy}
    result.detail = f"{horizon} slots, MD rate {metrics.md_rate():.4f}"
    return result


def check_mobility_trend(quick: bool = False) -> CheckResult:
    """Switches per minute do not fall as SUs move faster, at every channel count"""
    if quick:
        return CheckResult(name="mobility_trend", passed=True, cases=0, skipped=True, detail="skipped under --quick")
    config = ExperimentConfig({
        "schema_version": 1,
        "name": "mobility_trend",
        "seeds": list(range(10)),
        "scenario": {"generate": {"num_sus": 10, "num_channels": 5}},
        "horizon": 1200,
        "window_slots": 600,
        "sweep": {"variable": "V", "values": list(TREND_SPEEDS), "channels": list(TREND_CHANNELS)},
    })
    points = speed_sweep(config).summary["points"]
    result = CheckResult(name="mobility_trend", passed=True, cases=0)
    for n in TREND_CHANNELS:
        means = [points[f"N={n},V={float(v)}"]["mean"] for v in TREND_SPEEDS]
        result.cases += 1
        if any(later < earlier - TOLERANCE for earlier, later in zip(means, means[1:])) and result.passed:
            result.passed = False
            result.counterexample = {"num_channels": n, "speeds": list(TREND_SPEEDS), "switches_per_minute": means}
    result.detail = f"V {list(TREND_SPEEDS)} x N {list(TREND_CHANNELS)}, 10 seeds"
    return result


CHECKS: List[Callable[..., CheckResult]] = [
    check_md_conservation,
    check_characteristic_form,
    check_equal_efficiency,
    check_externality,
    check_split_sweep,
    check_bargaining,
    check_stability,
    check_satisfaction,
    check_monte_carlo,
    check_mobility_trend,
]


def run_verify(quick: bool = False, mutate: Optional[str] = None) -> VerifyReport:
    """
    Run the property suite

    Args:
        quick: Smaller draw counts and a short Monte Carlo run
        mutate: Name of a deliberate fault to inject (see MUTATIONS)

    Returns:
        VerifyReport
    """
    if mutate is not None and mutate not in MUTATIONS:
        raise ValueError(f"unknown mutation {mutate!r}; known: {', '.join(MUTATIONS)}")
    overrides = MUTATIONS.get(mutate, {})

    report = VerifyReport()
    for check in CHECKS:
        started = time.perf_counter()
        if check is check_externality and "weight_fn" in overrides:
            result = check(quick=quick, weight_fn=overrides["weight_fn"])
        else:
            result = check(quick=quick)
        result.seconds = time.perf_counter() - started
        logger.info(f"{'✓' if result.passed else '✗'} {result.name}: {result.cases} cases in {result.seconds:.2f}s")
        report.checks.append(result)
    return report
