#!/usr/bin/env python3
"""
Top-layer hedonic game

SUs pick channels; each channel's SUs form one grand coalition whose payoffs
come from the bottom-layer bargaining. An SU moves to another channel only
when it gains individually and the combined payoff of the two channels grows.
Formation is distributed: one SU holds the right to switch per slot.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

import detection
from bargaining import PayoffAllocation, allocation_from_sensing
from detection import MemberSensing, SensingContext
from network_model import NetworkScenario, data_rate, pu_su_snr


logger = logging.getLogger("coalspec.hedonic")

# su, channel, channel population -> FA entries of that SU
SensingLookup = Callable[[int, int, int], MemberSensing]


class FormationError(Exception):
    """Raised on invalid partitions or moves"""
    pass


class SuAction(Enum):
    SWITCH = "SWITCH"
    HOLD = "HOLD"
    SLEEP = "SLEEP"


@dataclass(frozen=True)
class SuState:
    """Formation state of one SU"""
    su: int
    action: SuAction
    candidates: Tuple[int, ...]
    active: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"su": self.su, "action": self.action.value, "candidates": list(self.candidates), "active": self.active}


@dataclass(frozen=True)
class TopPartition:
    """Channel of every SU; assignment[m] is the channel of SU m"""
    assignment: Tuple[int, ...]
    num_channels: int

    def __post_init__(self):
        for m, n in enumerate(self.assignment):
            if not 0 <= n < self.num_channels:
                raise FormationError(f"SU {m} assigned to unknown channel {n}")

    @classmethod
    def from_mapping(cls, assignment: Mapping[int, int], num_channels: int) -> "TopPartition":
        if sorted(assignment) != list(range(len(assignment))):
            raise FormationError("every SU id 0..M-1 must be assigned exactly once")
        return cls(assignment=tuple(assignment[m] for m in range(len(assignment))), num_channels=num_channels)

    @property
    def num_sus(self) -> int:
        return len(self.assignment)

    def coalition(self, n: int) -> Tuple[int, ...]:
        """SUs on channel n, sorted"""
        return tuple(m for m, c in enumerate(self.assignment) if c == n)

    def coalitions(self) -> Dict[int, Tuple[int, ...]]:
        return {n: self.coalition(n) for n in range(self.num_channels)}

    def moved(self, m: int, n: int) -> "TopPartition":
        assignment = list(self.assignment)
        assignment[m] = n
        return TopPartition(assignment=tuple(assignment), num_channels=self.num_channels)


@dataclass(frozen=True)
class SwitchRecord:
    slot: int
    su: int
    from_channel: int
    to_channel: int
    social_gain: float


@dataclass
class FormationTrace:
    """Bookkeeping of a formation run"""
    t_converge: int = 0
    switch_slots: List[int] = field(default_factory=list)
    fa_computation_count: int = 0
    formula_fa_count: int = 0
    exploration_slots: int = 0
    table_builds: int = 0
    movement_fa_count: int = 0
    switches: List[SwitchRecord] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t_converge": self.t_converge,
            "switch_slots": list(self.switch_slots),
            "switch_count": len(self.switch_slots),
            "fa_computation_count": self.fa_computation_count,
            "formula_fa_count": self.formula_fa_count,
            "exploration_slots": self.exploration_slots,
            "table_builds": self.table_builds,
            "movement_fa_count": self.movement_fa_count,
            "switches": [
                {
                    "slot": s.slot,
                    "su": s.su,
                    "from": s.from_channel,
                    "to": s.to_channel,
                    "social_gain": s.social_gain,
                }
                for s in self.switches
            ],
        }


# ----------------------------------------------------------------------------
# Preferences
# ----------------------------------------------------------------------------

def utility(m: int, allocation: PayoffAllocation, rate: float) -> float:
    """
    Expected rate x = a * R of SU m in its coalition

    Raises:
        FormationError: If m is not a member
    """
    if m not in allocation.payoffs:
        raise FormationError(f"SU {m} is not on channel {allocation.channel}")
    return allocation.payoffs[m] * rate


def _payoff_sum(allocation: Optional[PayoffAllocation]) -> float:
    if allocation is None:
        return 0.0
    return math.fsum(allocation.payoffs[i] for i in allocation.members)


def prefers(
    m: int,
    rate_from: float,
    rate_to: float,
    current_from: PayoffAllocation,
    current_to: Optional[PayoffAllocation],
    moved_from: Optional[PayoffAllocation],
    moved_to: PayoffAllocation,
) -> bool:
    """
    Whether SU m prefers to move between two channels

    Args:
        m: SU id
        rate_from: R of m on its current channel
        rate_to: R of m on the destination channel
        current_from: Allocation of the current channel with m
        current_to: Allocation of the destination without m (None if empty)
        moved_from: Allocation of the current channel without m (None if empty)
        moved_to: Allocation of the destination with m

    Returns:
        True iff m's utility and the two channels' combined payoff both strictly grow
    """
    if m not in current_from.payoffs or m not in moved_to.payoffs:
        raise FormationError(f"SU {m} must belong to its current and destination coalitions")
    if (current_to is not None and m in current_to.payoffs) or (
        moved_from is not None and m in moved_from.payoffs
    ):
        raise FormationError(f"SU {m} cannot be on both channels")
    individual = utility(m, moved_to, rate_to) > utility(m, current_from, rate_from)
    social = (
        _payoff_sum(moved_from) + _payoff_sum(moved_to)
        > _payoff_sum(current_from) + _payoff_sum(current_to)
    )
    return individual and social


@dataclass(frozen=True)
class MoveEvaluation:
    su: int
    from_channel: int
    to_channel: int
    utility_before: float
    utility_after: float
    social_before: float
    social_after: float
    preferred: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "su": self.su,
            "from_channel": self.from_channel,
            "to_channel": self.to_channel,
            "utility_before": self.utility_before,
            "utility_after": self.utility_after,
            "social_before": self.social_before,
            "social_after": self.social_after,
        }


def channel_allocation(
    scenario: NetworkScenario,
    channel: int,
    members: Sequence[int],
    lookup: SensingLookup,
) -> Optional[PayoffAllocation]:
    """Grand-coalition allocation of a channel, None when nobody is on it"""
    if not members:
        return None
    population = len(members)
    sensing = {i: lookup(i, channel, population) for i in sorted(members)}
    return allocation_from_sensing(
        scenario.mac_model,
        scenario.fusion_rule,
        channel,
        scenario.channel(channel).availability,
        sensing,
    )


def evaluate_move(
    scenario: NetworkScenario,
    partition: TopPartition,
    m: int,
    to_channel: int,
    lookup: SensingLookup,
) -> MoveEvaluation:
    """Evaluate SU m's move to to_channel against the current partition"""
    from_channel = partition.assignment[m]
    if to_channel == from_channel:
        raise FormationError(f"SU {m} is already on channel {to_channel}")
    members_from = partition.coalition(from_channel)
    members_to = partition.coalition(to_channel)

    current_from = channel_allocation(scenario, from_channel, members_from, lookup)
    current_to = channel_allocation(scenario, to_channel, members_to, lookup)
    moved_from = channel_allocation(scenario, from_channel, [i for i in members_from if i != m], lookup)
    moved_to = channel_allocation(scenario, to_channel, members_to + (m,), lookup)

    rate_from = data_rate(scenario, m, from_channel)
    rate_to = data_rate(scenario, m, to_channel)
    return MoveEvaluation(
        su=m,
        from_channel=from_channel,
        to_channel=to_channel,
        utility_before=utility(m, current_from, rate_from),
        utility_after=utility(m, moved_to, rate_to),
        social_before=_payoff_sum(current_from) + _payoff_sum(current_to),
        social_after=_payoff_sum(moved_from) + _payoff_sum(moved_to),
        preferred=prefers(m, rate_from, rate_to, current_from, current_to, moved_from, moved_to),
    )


def central_lookup(scenario: NetworkScenario) -> SensingLookup:
    """Lookup computing FA entries on demand, memoized per (su, channel, population)"""
    cache: Dict[Tuple[int, int, int], MemberSensing] = {}
    radio = scenario.radio

    def lookup(m: int, n: int, population: int) -> MemberSensing:
        key = (m, n, population)
        if key not in cache:
            ctx = SensingContext(
                md_budget=radio.md_budget,
                population=max(1, population),
                num_samples=radio.num_samples,
                fusion_rule=scenario.fusion_rule,
            )
            cache[key] = detection.member_sensing(ctx, pu_su_snr(scenario, m, n))
        return cache[key]

    return lookup


def partition_allocations(
    scenario: NetworkScenario,
    partition: TopPartition,
    lookup: Optional[SensingLookup] = None,
) -> Dict[int, PayoffAllocation]:
    """Allocations of every occupied channel"""
    lookup = lookup or central_lookup(scenario)
    allocations = {}
    for n, members in partition.coalitions().items():
        allocation = channel_allocation(scenario, n, members, lookup)
        if allocation is not None:
            allocations[n] = allocation
    return allocations


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    counterexample: Optional[MoveEvaluation] = None


def verify_nash_stable(partition: TopPartition, scenario: NetworkScenario) -> StabilityReport:
    """
    Test every SU against every other channel

    Returns:
        StabilityReport with the first preferred move found, if any
    """
    if partition.num_sus != scenario.num_sus or partition.num_channels != scenario.num_channels:
        raise FormationError("partition does not match the scenario dimensions")
    lookup = central_lookup(scenario)
    for m in range(partition.num_sus):
        for n in range(partition.num_channels):
            if n == partition.assignment[m]:
                continue
            evaluation = evaluate_move(scenario, partition, m, n, lookup)
            if evaluation.preferred:
                return StabilityReport(stable=False, counterexample=evaluation)
    return StabilityReport(stable=True)


# ----------------------------------------------------------------------------
# Distributed formation
# ----------------------------------------------------------------------------

class PartitionFormation:
    """
    Slot-steppable partition formation

    Each SU keeps its FA entries for its channel's population p and p +/- 1.
    The SU holding the right to switch tries one random candidate channel per
    slot; it keeps the right (HOLD) until it switches or runs out of
    candidates (SLEEP). Every switch wakes all SUs. Formation has converged
    when no SU is active.
    """

    def __init__(
        self,
        scenario: NetworkScenario,
        rng: np.random.Generator,
        initial_assignment: Optional[Mapping[int, int]] = None,
    ):
        self.scenario = scenario
        self.rng = rng
        if initial_assignment is None:
            assignment = {m: int(rng.integers(scenario.num_channels)) for m in range(scenario.num_sus)}
        else:
            assignment = dict(initial_assignment)
        self.partition = TopPartition.from_mapping(assignment, scenario.num_channels)
        self.trace = FormationTrace()

        self._tables: Dict[int, Dict[int, MemberSensing]] = {}
        self._actions: Dict[int, SuAction] = {}
        self._active: Set[int] = set()
        self._holder: Optional[int] = None
        self._candidates: List[int] = []
        self._action = SuAction.SWITCH
        self._phase_slots = 0
        self.converged = False
        self.slot = 0

        self._build_tables()

    # -- FA tables ----------------------------------------------------------

    def _sense(self, m: int, n: int, population: int, movement: bool = False) -> MemberSensing:
        radio = self.scenario.radio
        ctx = SensingContext(
            md_budget=radio.md_budget,
            population=max(1, population),
            num_samples=radio.num_samples,
            fusion_rule=self.scenario.fusion_rule,
        )
        if movement:
            self.trace.movement_fa_count += 1
        else:
            self.trace.fa_computation_count += 1
        return detection.member_sensing(ctx, pu_su_snr(self.scenario, m, n))

    def _build_tables(self, movement: bool = False):
        populations = {n: len(members) for n, members in self.partition.coalitions().items()}
        self._tables = {}
        for m, n in enumerate(self.partition.assignment):
            p = populations[n]
            self._tables[m] = {q: self._sense(m, n, q, movement) for q in (p - 1, p, p + 1)}
        if movement:
            return
        self.trace.formula_fa_count += 3 * self.scenario.num_sus
        self.trace.table_builds += 1

    def _lookup(self, explorer: int, explored: Optional[MemberSensing]) -> SensingLookup:
        def lookup(i: int, n: int, population: int) -> MemberSensing:
            if i == explorer and n != self.partition.assignment[i]:
                return explored
            try:
                return self._tables[i][population]
            except KeyError:
                raise FormationError(
                    f"SU {i} holds no FA entry for population {population} on channel {n}"
                ) from None
        return lookup

    # -- formation loop -----------------------------------------------------

    def su_states(self) -> List[SuState]:
        states = []
        for m in range(self.scenario.num_sus):
            holder = m == self._holder and not self.converged
            states.append(SuState(
                su=m,
                action=self._actions.get(m, SuAction.SWITCH),
                candidates=tuple(self._candidates) if holder else (),
                active=m in self._active,
            ))
        return states

    def _contend(self) -> bool:
        """Draw the SU holding the right to switch; False when everyone is asleep"""
        while self._active:
            contenders = sorted(self._active)
            m = contenders[int(self.rng.integers(len(contenders)))]
            n = self.partition.assignment[m]
            candidates = [c for c in range(self.scenario.num_channels) if c != n]
            if candidates:
                self._holder = m
                self._candidates = candidates
                return True
            # no other channel to explore
            self._active.discard(m)
            self._actions[m] = SuAction.SLEEP
        return False

    def _converge(self):
        self.converged = True
        self._holder = None
        self._candidates = []
        self.trace.t_converge = self._phase_slots
        logger.info(
            f"✓ Partition converged after {self._phase_slots} slots, "
            f"{len(self.trace.switch_slots)} switches in total"
        )

    def step(self, slot: Optional[int] = None) -> Optional[SuAction]:
        """
        Run one formation slot

        Args:
            slot: Slot label recorded for switches; the internal counter otherwise

        Returns:
            Action taken this slot, or None once converged
        """
        if self.converged:
            return None
        label = self.slot if slot is None else slot

        if self._action is SuAction.SWITCH:
            self._active = set(range(self.scenario.num_sus))
        if self._action is not SuAction.HOLD:
            if not self._contend():
                self._converge()
                return None

        m = self._holder
        from_channel = self.partition.assignment[m]
        to_channel = self._candidates.pop(int(self.rng.integers(len(self._candidates))))
        to_population = len(self.partition.coalition(to_channel))

        explored = self._sense(m, to_channel, to_population + 1)
        self.trace.formula_fa_count += 1
        self.trace.exploration_slots += 1
        self._phase_slots += 1
        self.slot += 1

        evaluation = evaluate_move(
            self.scenario, self.partition, m, to_channel, self._lookup(m, explored)
        )
        if evaluation.preferred:
            self._switch(m, from_channel, to_channel, explored, label, evaluation)
            self._action = SuAction.SWITCH
        elif self._candidates:
            self._action = SuAction.HOLD
        else:
            self._active.discard(m)
            self._action = SuAction.SLEEP
        self._actions[m] = self._action

        if self._action is SuAction.SLEEP and not self._active:
            self._converge()
        return self._action

    def _switch(
        self,
        m: int,
        from_channel: int,
        to_channel: int,
        explored: MemberSensing,
        label: int,
        evaluation: MoveEvaluation,
    ):
        leavers = [i for i in self.partition.coalition(from_channel) if i != m]
        joiners = list(self.partition.coalition(to_channel))
        p_from = len(leavers) + 1
        p_to = len(joiners)

        for i in leavers:
            table = self._tables[i]
            table.pop(p_from + 1, None)
            table[p_from - 2] = self._sense(i, from_channel, p_from - 2)
        for i in joiners:
            table = self._tables[i]
            table.pop(p_to - 1, None)
            table[p_to + 2] = self._sense(i, to_channel, p_to + 2)

        self.partition = self.partition.moved(m, to_channel)
        self._tables[m] = {
            p_to: self._sense(m, to_channel, p_to),
            p_to + 1: explored,
            p_to + 2: self._sense(m, to_channel, p_to + 2),
        }
        # |C~n| + |C~n~| + 1 with |C~n~| = p_to + 1
        self.trace.formula_fa_count += len(leavers) + (p_to + 1) + 1
        self.trace.switch_slots.append(label)
        self.trace.switches.append(SwitchRecord(
            slot=label,
            su=m,
            from_channel=from_channel,
            to_channel=to_channel,
            social_gain=evaluation.social_after - evaluation.social_before,
        ))
        logger.debug(f"Slot {label}: SU {m} switches {from_channel} -> {to_channel}")

    def run(self, max_switches: Optional[int] = None) -> FormationTrace:
        """
        Step until convergence

        Raises:
            FormationError: If the switch count exceeds N^M (or max_switches)
        """
        bound = max_switches
        if bound is None:
            bound = self.scenario.num_channels ** self.scenario.num_sus
        start = len(self.trace.switch_slots)
        while not self.converged:
            self.step()
            if len(self.trace.switch_slots) - start > bound:
                raise FormationError(f"formation exceeded {bound} switches")
        return self.trace

    # -- topology changes ---------------------------------------------------

    def resume(self):
        """Wake all SUs, e.g. after the partition became unstable"""
        self.converged = False
        self._action = SuAction.SWITCH
        self._actions = {}
        self._phase_slots = 0

    def update_scenario(self, scenario: NetworkScenario, reactivate: bool = True):
        """
        Adopt a changed scenario, keeping every surviving SU on its channel

        SUs whose channel disappeared and new SUs join a random channel. FA
        tables are rebuilt for the new SNRs and populations. Without
        reactivation the update follows SU movement, and its FA computations
        go to movement_fa_count instead of the formation counters.
        """
        old = self.partition.assignment
        assignment = {}
        for m in range(scenario.num_sus):
            if m < len(old) and old[m] < scenario.num_channels:
                assignment[m] = old[m]
            else:
                assignment[m] = int(self.rng.integers(scenario.num_channels))
        self.scenario = scenario
        self.partition = TopPartition.from_mapping(assignment, scenario.num_channels)
        self._active &= set(range(scenario.num_sus))
        if self._holder is not None and self._holder >= scenario.num_sus:
            self._holder = None
            if self._action is SuAction.HOLD:
                self._action = SuAction.SWITCH
        if self._holder is not None:
            n = self.partition.assignment[self._holder]
            self._candidates = [c for c in self._candidates if c < scenario.num_channels and c != n]
            if not self._candidates and self._action is SuAction.HOLD:
                self._action = SuAction.SWITCH
        self._build_tables(movement=not reactivate)
        if reactivate:
            self.resume()

    def allocations(self) -> Dict[int, PayoffAllocation]:
        """Current allocation of every occupied channel, from the SUs' own tables"""
        def lookup(i: int, n: int, population: int) -> MemberSensing:
            return self._tables[i][population]
        return partition_allocations(self.scenario, self.partition, lookup)


def form_partition(
    scenario: NetworkScenario,
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    initial_assignment: Optional[Mapping[int, int]] = None,
) -> Tuple[TopPartition, Dict[int, PayoffAllocation], FormationTrace]:
    """
    Run distributed formation to convergence

    Args:
        scenario: Network scenario
        seed: Seed for contention and candidate draws (ignored when rng is given)
        rng: Random generator to draw from
        initial_assignment: Starting channel per SU, random when omitted

    Returns:
        Tuple of (partition, allocations per occupied channel, trace)
    """
    rng = rng if rng is not None else np.random.default_rng(seed)
    formation = PartitionFormation(scenario, rng, initial_assignment)
    trace = formation.run()
    return formation.partition, formation.allocations(), trace
