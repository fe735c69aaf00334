#!/usr/bin/env python3
"""
Slot-by-slot Monte Carlo execution of the two-layer game

Draws PU occupancy, sensing outcomes, MAC contention and transmissions,
applies population events and mobility, and accumulates metrics.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

import detection
from bargaining import PayoffAllocation
from detection import SensingContext
from hedonic import PartitionFormation, SuAction, TopPartition, partition_allocations, verify_nash_stable
from mobility import MobilityState, apply_positions, mobility_from_scenario, mobility_step, resize_mobility
from network_model import MacModel, NetworkScenario, data_rate, pu_su_snr, resize_channels, resize_sus
from switch_meter import SwitchMeter, overall_switches_per_minute
from utils import spawn_generators


logger = logging.getLogger("coalspec.sim")

# formation, traffic, mobility, events
RUN_STREAMS = 4


def formation_generator(seed: int) -> np.random.Generator:
    """Formation stream of a run with this seed, apart from placement and traffic"""
    return spawn_generators(seed, RUN_STREAMS)[0]


class SimulationError(Exception):
    """Raised on invalid simulation inputs"""
    pass


class EventKind(Enum):
    SET_SU_COUNT = "SET_SU_COUNT"
    SET_CHANNEL_COUNT = "SET_CHANNEL_COUNT"


@dataclass(frozen=True)
class ScenarioEvent:
    """Population change applied at the start of a slot"""
    slot: int
    kind: EventKind
    value: int

    def __post_init__(self):
        if self.slot < 0:
            raise SimulationError(f"event slot must be nonnegative, got {self.slot}")
        if self.value < 1:
            raise SimulationError(f"event value must be at least 1, got {self.value}")


def validate_events(events: Sequence[ScenarioEvent]) -> Tuple[ScenarioEvent, ...]:
    """Check that event slots strictly increase"""
    events = tuple(events)
    for before, after in zip(events, events[1:]):
        if after.slot <= before.slot:
            raise SimulationError(
                f"event slots must strictly increase, got {before.slot} then {after.slot}"
            )
    return events


class DetectionOutcome(Enum):
    FALSE_ALARM = "FA"
    IDLE_DETECTED = "IDLE"
    MISSED = "MD"
    BUSY_DETECTED = "BUSY"


@dataclass(frozen=True)
class CoalitionLink:
    """What the slot engine needs to know about one sensing coalition"""
    channel: int
    members: Tuple[int, ...]
    fa: float
    md: float
    shares: Dict[int, float]
    rates: Dict[int, float]


@dataclass
class SlotState:
    """Coalitions per channel and the SUs that sense this slot"""
    scenario: NetworkScenario
    links: Dict[int, List[CoalitionLink]]
    sensing_sus: Tuple[int, ...]


@dataclass
class SlotOutcome:
    slot: int
    busy: Dict[int, bool] = field(default_factory=dict)
    detections: Dict[int, List[DetectionOutcome]] = field(default_factory=dict)
    transmitters: Dict[int, List[int]] = field(default_factory=dict)
    delivered_bits: Dict[int, float] = field(default_factory=dict)
    energy_j: Dict[int, float] = field(default_factory=dict)
    collisions: int = 0
    pu_interference: int = 0

    @property
    def total_bits(self) -> float:
        return math.fsum(self.delivered_bits.values())

    @property
    def total_energy(self) -> float:
        return math.fsum(self.energy_j.values())


def _draw_transmitter(link: CoalitionLink, rng: np.random.Generator) -> int:
    members = sorted(link.shares)
    cumulative = np.cumsum([link.shares[m] for m in members])
    index = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))
    return members[min(index, len(members) - 1)]


def run_slot(state: SlotState, rng: np.random.Generator, slot: int = 0) -> SlotOutcome:
    """
    Realize one slot

    Channels are drawn in id order: occupancy first, then one sensing draw per
    coalition, then contention and transmitter draws.
    """
    scenario = state.scenario
    radio = scenario.radio
    sense_j = radio.sense_power_mW / 1000.0 * radio.sense_s
    tx_j = radio.tx_power_su_mW / 1000.0 * radio.tx_s

    outcome = SlotOutcome(slot=slot)
    for m in state.sensing_sus:
        outcome.energy_j[m] = sense_j
        outcome.delivered_bits[m] = 0.0

    for n in range(scenario.num_channels):
        busy = bool(rng.random() >= scenario.channel(n).availability)
        outcome.busy[n] = busy
        links = state.links.get(n, [])
        if not links:
            continue

        detecting = []
        results = []
        for link in links:
            u = rng.random()
            if busy:
                missed = u < link.md
                results.append(DetectionOutcome.MISSED if missed else DetectionOutcome.BUSY_DETECTED)
                if missed:
                    detecting.append(link)
            else:
                false_alarm = u < link.fa
                results.append(DetectionOutcome.FALSE_ALARM if false_alarm else DetectionOutcome.IDLE_DETECTED)
                if not false_alarm:
                    detecting.append(link)
        outcome.detections[n] = results

        # degenerate coalitions stay silent
        detecting = [link for link in detecting if link.shares]
        if not detecting:
            continue

        if scenario.mac_model is MacModel.ZERO_X:
            senders = [(link, _draw_transmitter(link, rng)) for link in detecting]
            delivered = len(senders) == 1 and not busy
            if len(senders) > 1:
                outcome.collisions += 1
        else:
            competing = sum(len(link.members) for link in detecting)
            pick = int(rng.integers(competing))
            for link in detecting:
                if pick < len(link.members):
                    winner = link
                    break
                pick -= len(link.members)
            senders = [(winner, _draw_transmitter(winner, rng))]
            delivered = not busy

        outcome.transmitters[n] = [m for _, m in senders]
        for link, m in senders:
            outcome.energy_j[m] = outcome.energy_j.get(m, 0.0) + tx_j
            if delivered:
                outcome.delivered_bits[m] = outcome.delivered_bits.get(m, 0.0) + link.rates[m] * radio.tx_s
        if busy:
            outcome.pu_interference += 1

    return outcome


# ----------------------------------------------------------------------------
# Baselines
# ----------------------------------------------------------------------------

def _alone_fa(scenario: NetworkScenario, m: int, n: int) -> float:
    radio = scenario.radio
    ctx = SensingContext(
        md_budget=radio.md_budget,
        population=1,
        num_samples=radio.num_samples,
        fusion_rule=scenario.fusion_rule,
    )
    return detection.coalition_fa(ctx, [pu_su_snr(scenario, m, n)])


def _best_alone_channel(scenario: NetworkScenario, m: int) -> Tuple[int, float, float]:
    """(channel, FA, expected rate) of SU m's best channel when alone in the network"""
    best = None
    for n in range(scenario.num_channels):
        fa = _alone_fa(scenario, m, n)
        rate = scenario.channel(n).availability * (1.0 - fa) * data_rate(scenario, m, n)
        if best is None or rate > best[2]:
            best = (n, fa, rate)
    return best


def standalone_baseline(scenario: NetworkScenario) -> Dict[int, float]:
    """
    Expected rate of every SU operating alone on its best channel

    availability * (1 - FA when sensing alone) * rate, maximized over channels.
    """
    return {m: _best_alone_channel(scenario, m)[2] for m in range(scenario.num_sus)}


def standalone_efficiency(scenario: NetworkScenario) -> Dict[int, float]:
    """Expected bits/Joule of every SU operating alone on its best-rate channel"""
    radio = scenario.radio
    sense_j = radio.sense_power_mW / 1000.0 * radio.sense_s
    tx_j = radio.tx_power_su_mW / 1000.0 * radio.tx_s
    efficiency = {}
    for m in range(scenario.num_sus):
        n, fa, _ = _best_alone_channel(scenario, m)
        beta = scenario.channel(n).availability
        idle_tx = beta * (1.0 - fa)
        missed_tx = (1.0 - beta) * radio.md_budget
        bits = idle_tx * data_rate(scenario, m, n) * radio.tx_s
        efficiency[m] = bits / (sense_j + (idle_tx + missed_tx) * tx_j)
    return efficiency


def noncooperative_baseline(
    scenario: NetworkScenario,
    partition: TopPartition,
    allocations: Optional[Dict[int, PayoffAllocation]] = None,
) -> Dict[int, float]:
    """Disagreement payoff times link rate for every SU on its current channel"""
    allocations = allocations or partition_allocations(scenario, partition)
    baseline = {}
    for m, n in enumerate(partition.assignment):
        baseline[m] = allocations[n].disagreement.values[m] * data_rate(scenario, m, n)
    return baseline


def expected_rates(
    scenario: NetworkScenario,
    partition: TopPartition,
    allocations: Optional[Dict[int, PayoffAllocation]] = None,
) -> Dict[int, float]:
    """Bargained payoff times link rate for every SU"""
    allocations = allocations or partition_allocations(scenario, partition)
    return {
        m: allocations[n].payoffs[m] * data_rate(scenario, m, n)
        for m, n in enumerate(partition.assignment)
    }


def energy_efficiency(delivered_bits: float, energy_j: float) -> float:
    """
    Delivered bits per Joule

    Raises:
        SimulationError: If no energy was spent
    """
    if not energy_j > 0.0:
        raise SimulationError("energy efficiency undefined: zero energy spent")
    return delivered_bits / energy_j


# ----------------------------------------------------------------------------
# Metrics
# ----------------------------------------------------------------------------

@dataclass
class WindowMetrics:
    start_slot: int
    end_slot: int
    num_sus: int
    num_channels: int
    throughput_bps: float
    energy_j: float
    energy_efficiency: float
    rate_dissatisfied: int
    efficiency_dissatisfied: int
    expected_dissatisfied: int
    switches: int
    switches_per_minute: float
    avg_coalition_fa: float

    def to_row(self) -> Dict[str, Any]:
        return dict(self.__dict__)


WINDOW_COLUMNS = [
    "start_slot", "end_slot", "num_sus", "num_channels", "throughput_bps", "energy_j",
    "energy_efficiency", "rate_dissatisfied", "efficiency_dissatisfied",
    "expected_dissatisfied", "switches", "switches_per_minute", "avg_coalition_fa",
]

SLOT_COLUMNS = [
    "slot", "num_sus", "num_channels", "throughput_bps", "energy_j", "transmissions",
    "collisions", "pu_interference", "switches", "avg_coalition_fa", "fa_computations",
]


@dataclass
class SimMetrics:
    """Everything measured in one run"""
    seed: Optional[int]
    slot_ms: float
    horizon: int = 0
    throughput_bps: List[float] = field(default_factory=list)
    energy_j: List[float] = field(default_factory=list)
    transmissions: List[int] = field(default_factory=list)
    collisions: List[int] = field(default_factory=list)
    pu_interference: List[int] = field(default_factory=list)
    switches: List[int] = field(default_factory=list)
    num_sus: List[int] = field(default_factory=list)
    num_channels: List[int] = field(default_factory=list)
    avg_coalition_fa: List[float] = field(default_factory=list)
    fa_computations: List[int] = field(default_factory=list)
    bits_by_su: Dict[int, float] = field(default_factory=dict)
    energy_by_su: Dict[int, float] = field(default_factory=dict)
    tx_slots_by_su: Dict[int, int] = field(default_factory=dict)
    busy_slots: Dict[int, int] = field(default_factory=dict)
    missed_busy_slots: Dict[int, int] = field(default_factory=dict)
    windows: List[WindowMetrics] = field(default_factory=list)
    event_slots: List[int] = field(default_factory=list)
    stability_breaks: int = 0
    formation_phases: List[Dict[str, Any]] = field(default_factory=list)
    formation_trace: Dict[str, Any] = field(default_factory=dict)
    expected_rates: Dict[int, float] = field(default_factory=dict)
    standalone_rates: Dict[int, float] = field(default_factory=dict)

    @property
    def total_bits(self) -> float:
        return math.fsum(self.bits_by_su.values())

    @property
    def total_energy(self) -> float:
        return math.fsum(self.energy_by_su.values())

    @property
    def switch_count(self) -> int:
        return sum(self.switches)

    def energy_efficiency(self) -> float:
        return energy_efficiency(self.total_bits, self.total_energy)

    def switches_per_minute(self) -> float:
        return overall_switches_per_minute(self.switch_count, self.horizon, self.slot_ms)

    def su_rate(self, m: int) -> float:
        """Realized average rate of SU m over the run, bits/s"""
        if self.horizon == 0:
            return 0.0
        return self.bits_by_su.get(m, 0.0) / (self.horizon * self.slot_ms / 1000.0)

    def md_rate(self) -> float:
        """Fraction of busy slots in which a coalition missed the PU"""
        busy = sum(self.busy_slots.values())
        if busy == 0:
            return 0.0
        return sum(self.missed_busy_slots.values()) / busy

    def slot_rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "slot": t,
                "num_sus": self.num_sus[t],
                "num_channels": self.num_channels[t],
                "throughput_bps": self.throughput_bps[t],
                "energy_j": self.energy_j[t],
                "transmissions": self.transmissions[t],
                "collisions": self.collisions[t],
                "pu_interference": self.pu_interference[t],
                "switches": self.switches[t],
                "avg_coalition_fa": self.avg_coalition_fa[t],
                "fa_computations": self.fa_computations[t],
            }
            for t in range(self.horizon)
        ]

    def window_rows(self) -> List[Dict[str, Any]]:
        return [w.to_row() for w in self.windows]

    def summary(self) -> Dict[str, float]:
        """Scalar figures of the run"""
        seconds = self.horizon * self.slot_ms / 1000.0
        return {
            "horizon": self.horizon,
            "throughput_bps": self.total_bits / seconds if seconds else 0.0,
            "energy_j": self.total_energy,
            "energy_efficiency": self.energy_efficiency() if self.total_energy > 0 else 0.0,
            "switch_count": self.switch_count,
            "switches_per_minute": self.switches_per_minute(),
            "md_rate": self.md_rate(),
            "stability_breaks": self.stability_breaks,
            "avg_coalition_fa": float(np.mean(self.avg_coalition_fa)) if self.avg_coalition_fa else 0.0,
            "mean_rate_dissatisfied": float(np.mean([w.rate_dissatisfied for w in self.windows])) if self.windows else 0.0,
            "mean_efficiency_dissatisfied": float(np.mean([w.efficiency_dissatisfied for w in self.windows])) if self.windows else 0.0,
            "fa_computations": self.fa_computations[-1] if self.fa_computations else 0,
        }


# ----------------------------------------------------------------------------
# Simulator
# ----------------------------------------------------------------------------

def build_links(
    scenario: NetworkScenario,
    partition: TopPartition,
    allocations: Dict[int, PayoffAllocation],
) -> Dict[int, List[CoalitionLink]]:
    """One grand-coalition link per occupied channel"""
    radio = scenario.radio
    links = {}
    for n, members in partition.coalitions().items():
        if not members:
            continue
        ctx = SensingContext(
            md_budget=radio.md_budget,
            population=len(members),
            num_samples=radio.num_samples,
            fusion_rule=scenario.fusion_rule,
        )
        sensing = detection.evaluate_coalition(ctx, [pu_su_snr(scenario, m, n) for m in members])
        links[n] = [CoalitionLink(
            channel=n,
            members=members,
            fa=sensing.coalition_fa,
            md=sensing.coalition_md,
            shares=dict(allocations[n].slot_shares),
            rates={m: data_rate(scenario, m, n) for m in members},
        )]
    return links


class Simulator:
    """
    One seeded run of the game

    The initial partition is formed to convergence before slot 0. After an
    event, formation restarts from the current channels and advances one slot
    at a time while SUs keep sensing and transmitting.
    """

    def __init__(
        self,
        scenario: NetworkScenario,
        events: Sequence[ScenarioEvent] = (),
        speed_mps: float = 0.0,
        seed: int = 0,
        window_slots: int = 600,
        initial_assignment: Optional[Dict[int, int]] = None,
    ):
        if speed_mps < 0:
            raise SimulationError(f"speed must be nonnegative, got {speed_mps}")
        if window_slots < 1:
            raise SimulationError("window_slots must be at least 1")
        self.scenario = scenario
        self.events = validate_events(events)
        self.speed_mps = speed_mps
        self.seed = seed
        self.window_slots = window_slots

        formation_rng, self.traffic_rng, self.mobility_rng, self.event_rng = spawn_generators(seed, RUN_STREAMS)
        self._phases: List[Dict[str, Any]] = []
        self.formation = PartitionFormation(scenario, formation_rng, initial_assignment)
        self.formation.run()
        self._record_phase(start_slot=-1, end_slot=-1)

        self.mobility: Optional[MobilityState] = None
        if speed_mps > 0:
            self.mobility = mobility_from_scenario(scenario, speed_mps, self.mobility_rng)

        self.switch_meter = SwitchMeter(scenario.radio.slot_ms, window_slots)
        self.metrics = SimMetrics(seed=seed, slot_ms=scenario.radio.slot_ms)
        self._phase_start = 0
        self._window = self._empty_window()
        self._rebuild()

    # -- helpers ------------------------------------------------------------

    def _record_phase(self, start_slot: int, end_slot: int):
        trace = self.formation.trace
        self._phases.append({
            "start_slot": start_slot,
            "end_slot": end_slot,
            "t_converge": trace.t_converge,
            "switch_count": len(trace.switch_slots),
        })

    def _rebuild(self):
        self.allocations = partition_allocations(self.scenario, self.formation.partition)
        self.links = build_links(self.scenario, self.formation.partition, self.allocations)
        fas = [link.fa for links in self.links.values() for link in links]
        self._avg_fa = float(np.mean(fas)) if fas else 0.0

    def _empty_window(self) -> Dict[str, Any]:
        return {"start": None, "bits": {}, "energy": {}, "fa": []}

    def _apply_events(self, slot: int):
        for event in self.events:
            if event.slot != slot:
                continue
            if event.kind is EventKind.SET_SU_COUNT:
                scenario = resize_sus(self.scenario, event.value, self.event_rng)
            else:
                scenario = resize_channels(self.scenario, event.value, self.event_rng)
            logger.info(
                f"Slot {slot}: {event.kind.value} -> {event.value}, re-forming partition"
            )
            self.scenario = scenario
            if self.mobility is not None:
                self.mobility = resize_mobility(self.mobility, scenario, self.mobility_rng)
            self.formation.update_scenario(scenario, reactivate=True)
            self.metrics.event_slots.append(slot)
            self._phase_start = slot
            self._rebuild()

    def _move(self, slot: int):
        self.mobility = mobility_step(self.mobility, self.mobility_rng)
        self.scenario = apply_positions(self.scenario, self.mobility)
        if not self.formation.converged:
            self.formation.update_scenario(self.scenario, reactivate=False)
        else:
            report = verify_nash_stable(self.formation.partition, self.scenario)
            if not report.stable:
                logger.debug(
                    f"Slot {slot}: partition unstable (SU {report.counterexample.su} "
                    f"prefers channel {report.counterexample.to_channel}), resuming formation"
                )
                self.metrics.stability_breaks += 1
                self.formation.update_scenario(self.scenario, reactivate=True)
                self._phase_start = slot
        self._rebuild()

    def _close_window(self, end_slot: int):
        window = self._window
        start = window["start"]
        slots = end_slot - start + 1
        seconds = slots * self.scenario.radio.slot_s
        bits = window["bits"]
        energy = window["energy"]
        total_bits = math.fsum(bits.values())
        total_energy = math.fsum(energy.values())

        duty = self.scenario.radio.tx_s / self.scenario.radio.slot_s
        baseline = standalone_baseline(self.scenario)
        baseline_eff = standalone_efficiency(self.scenario)
        noncoop = noncooperative_baseline(self.scenario, self.formation.partition, self.allocations)
        game = expected_rates(self.scenario, self.formation.partition, self.allocations)

        rate_dissatisfied = 0
        efficiency_dissatisfied = 0
        for m in range(self.scenario.num_sus):
            if bits.get(m, 0.0) / seconds < baseline[m] * duty:
                rate_dissatisfied += 1
            su_energy = energy.get(m, 0.0)
            su_eff = bits.get(m, 0.0) / su_energy if su_energy > 0 else 0.0
            if su_eff < baseline_eff[m]:
                efficiency_dissatisfied += 1
        expected_dissatisfied = sum(1 for m in game if game[m] < noncoop[m])

        self.metrics.windows.append(WindowMetrics(
            start_slot=start,
            end_slot=end_slot,
            num_sus=self.scenario.num_sus,
            num_channels=self.scenario.num_channels,
            throughput_bps=total_bits / seconds,
            energy_j=total_energy,
            energy_efficiency=energy_efficiency(total_bits, total_energy) if total_energy > 0 else 0.0,
            rate_dissatisfied=rate_dissatisfied,
            efficiency_dissatisfied=efficiency_dissatisfied,
            expected_dissatisfied=expected_dissatisfied,
            switches=self.switch_meter.switches_in_window(end_slot, slots),
            switches_per_minute=self.switch_meter.switches_per_minute(end_slot, slots),
            avg_coalition_fa=float(np.mean(window["fa"])) if window["fa"] else 0.0,
        ))
        self._window = self._empty_window()

    def _record(self, slot: int, outcome: SlotOutcome, switched: int):
        metrics = self.metrics
        slot_s = self.scenario.radio.slot_s
        metrics.horizon += 1
        metrics.throughput_bps.append(outcome.total_bits / slot_s)
        metrics.energy_j.append(outcome.total_energy)
        metrics.transmissions.append(sum(len(v) for v in outcome.transmitters.values()))
        metrics.collisions.append(outcome.collisions)
        metrics.pu_interference.append(outcome.pu_interference)
        metrics.switches.append(switched)
        metrics.num_sus.append(self.scenario.num_sus)
        metrics.num_channels.append(self.scenario.num_channels)
        metrics.avg_coalition_fa.append(self._avg_fa)
        metrics.fa_computations.append(self.formation.trace.fa_computation_count)

        for m, bits in outcome.delivered_bits.items():
            metrics.bits_by_su[m] = metrics.bits_by_su.get(m, 0.0) + bits
        for m, joules in outcome.energy_j.items():
            metrics.energy_by_su[m] = metrics.energy_by_su.get(m, 0.0) + joules
        for senders in outcome.transmitters.values():
            for m in senders:
                metrics.tx_slots_by_su[m] = metrics.tx_slots_by_su.get(m, 0) + 1
        for n, busy in outcome.busy.items():
            if not busy or n not in self.links:
                continue
            metrics.busy_slots[n] = metrics.busy_slots.get(n, 0) + 1
            if DetectionOutcome.MISSED in outcome.detections.get(n, []):
                metrics.missed_busy_slots[n] = metrics.missed_busy_slots.get(n, 0) + 1

        window = self._window
        if window["start"] is None:
            window["start"] = slot
        for m, bits in outcome.delivered_bits.items():
            window["bits"][m] = window["bits"].get(m, 0.0) + bits
        for m, joules in outcome.energy_j.items():
            window["energy"][m] = window["energy"].get(m, 0.0) + joules
        window["fa"].append(self._avg_fa)

    # -- main loop ----------------------------------------------------------

    def step(self, slot: int) -> SlotOutcome:
        """Advance the network by one slot"""
        self._apply_events(slot)
        if self.mobility is not None:
            self._move(slot)

        switched = 0
        if not self.formation.converged:
            action = self.formation.step(slot=slot)
            if action is SuAction.SWITCH:
                switched = 1
                self.switch_meter.record_switch(slot)
                self._rebuild()
            if self.formation.converged:
                self._record_phase(self._phase_start, slot)

        state = SlotState(
            scenario=self.scenario,
            links=self.links,
            sensing_sus=tuple(range(self.scenario.num_sus)),
        )
        outcome = run_slot(state, self.traffic_rng, slot)
        self._record(slot, outcome, switched)
        if (slot + 1) % self.window_slots == 0:
            self._close_window(slot)
        return outcome

    def run(self, horizon: int) -> SimMetrics:
        """
        Run the given number of slots

        Returns:
            SimMetrics, empty for a zero horizon
        """
        if horizon < 0:
            raise SimulationError(f"horizon must be nonnegative, got {horizon}")
        for slot in range(self.metrics.horizon, self.metrics.horizon + horizon):
            self.step(slot)
        if self._window["start"] is not None:
            self._close_window(self.metrics.horizon - 1)

        self.metrics.formation_phases = list(self._phases)
        self.metrics.formation_trace = self.formation.trace.to_dict()
        self.metrics.formation_trace["su_states"] = [s.to_dict() for s in self.formation.su_states()]
        if not self.formation.converged:
            awake = sum(1 for s in self.formation.su_states() if s.active)
            logger.warning(f"⚠️  Seed {self.seed}: horizon ended during formation, {awake} SUs still active")
        self.metrics.expected_rates = expected_rates(self.scenario, self.formation.partition, self.allocations)
        self.metrics.standalone_rates = standalone_baseline(self.scenario)
        logger.info(
            f"✓ Seed {self.seed}: {self.metrics.horizon} slots, "
            f"{self.metrics.switch_count} switches, "
            f"{self.metrics.total_bits / 1e6:.1f} Mbit delivered"
        )
        return self.metrics


def run_scenario(
    scenario: NetworkScenario,
    events: Sequence[ScenarioEvent] = (),
    speed_mps: float = 0.0,
    horizon: int = 6000,
    seed: int = 0,
    window_slots: int = 600,
) -> SimMetrics:
    """
    Simulate a scenario with population events and mobility

    Args:
        scenario: Initial network
        events: Population changes, slots strictly increasing
        speed_mps: Random-direction speed V of SU endpoints
        horizon: Number of slots
        seed: Master seed for formation, traffic, mobility and event draws
        window_slots: Metric window length in slots

    Returns:
        SimMetrics
    """
    simulator = Simulator(scenario, events, speed_mps, seed, window_slots)
    return simulator.run(horizon)
