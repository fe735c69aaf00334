#!/usr/bin/env python3
"""
Bottom-layer payoff allocation

The grand coalition forms on every channel; its value is divided by the
Nash bargaining solution under the 0/X model and by the fine NBS under the
1/X model. Payoffs translate into each SU's share of a sensed idle slot.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple

import detection
from coalition import BottomPartition, CoalitionValueInputs, grand_coalition_inputs, value_0x, value_1x
from detection import MemberSensing, SensingContext
from network_model import FusionRule, MacModel, NetworkScenario, pu_su_snr


logger = logging.getLogger("coalspec.bargaining")


class BargainingError(Exception):
    """Raised when payoffs cannot be turned into slot shares"""
    pass


@dataclass(frozen=True)
class DisagreementPoint:
    """What each SU secures without agreement"""
    values: Dict[int, float]


@dataclass(frozen=True)
class PayoffAllocation:
    """Transferable payoffs of one channel's grand coalition"""
    channel: int
    members: Tuple[int, ...]
    payoffs: Dict[int, float]
    slot_shares: Dict[int, float]
    disagreement: DisagreementPoint
    mac_model: MacModel
    coalition_value: float
    degenerate: bool = False

    @property
    def total(self) -> float:
        return sum(self.payoffs[m] for m in self.members)

    def payoff(self, m: int) -> float:
        if m not in self.payoffs:
            raise BargainingError(f"SU {m} is not a member of the coalition on channel {self.channel}")
        return self.payoffs[m]


def slot_shares(payoffs: Mapping[int, float]) -> Dict[int, float]:
    """
    Each SU's fair share a_m / sum(a) of a sensed idle slot

    Raises:
        BargainingError: If the payoffs sum to zero
    """
    members = sorted(payoffs)
    total = sum(payoffs[m] for m in members)
    if not total > 0.0:
        raise BargainingError("degenerate coalition: payoffs sum to zero")
    return {m: payoffs[m] / total for m in members}


def _finish(
    channel: int,
    members: Tuple[int, ...],
    payoffs: Dict[int, float],
    disagreement: Dict[int, float],
    mac_model: MacModel,
    coalition_value: float,
) -> PayoffAllocation:
    try:
        shares = slot_shares(payoffs)
        degenerate = False
    except BargainingError:
        logger.warning(f"Channel {channel}: degenerate coalition {list(members)}, stays silent")
        shares = {}
        degenerate = True
    return PayoffAllocation(
        channel=channel,
        members=members,
        payoffs=payoffs,
        slot_shares=shares,
        disagreement=DisagreementPoint(values=disagreement),
        mac_model=mac_model,
        coalition_value=coalition_value,
        degenerate=degenerate,
    )


def _check_members(members: Sequence[int]) -> Tuple[int, ...]:
    members = tuple(sorted(members))
    if not members:
        raise BargainingError("bargaining needs at least one SU")
    if len(set(members)) != len(members):
        raise BargainingError(f"duplicate SUs in {list(members)}")
    return members


def nbs_0x(members: Sequence[int], channel: int, inputs: CoalitionValueInputs) -> PayoffAllocation:
    """
    Nash bargaining solution of the 0/X game

    Every SU receives its standalone value plus an equal share of the surplus
    of the grand coalition.
    """
    members = _check_members(members)
    grand = BottomPartition.grand(channel, members)
    singles = BottomPartition.singletons(channel, members)
    grand_value = value_0x(frozenset(members), grand, inputs)
    standalone = {m: value_0x(frozenset([m]), singles, inputs) for m in members}
    surplus = (grand_value - sum(standalone[m] for m in members)) / len(members)
    if surplus < 0.0:
        logger.warning(f"Channel {channel}: negative bargaining surplus {surplus:.3e}")
    payoffs = {m: surplus + standalone[m] for m in members}
    return _finish(channel, members, payoffs, standalone, MacModel.ZERO_X, grand_value)


def fnbs_1x(members: Sequence[int], channel: int, inputs: CoalitionValueInputs) -> PayoffAllocation:
    """
    Fine Nash bargaining solution of the 1/X game

    The disagreement point is the all-singleton partition, and the solution
    pays each SU exactly its value there.
    """
    members = _check_members(members)
    singles = BottomPartition.singletons(channel, members)
    payoffs = {m: value_1x(frozenset([m]), singles, inputs) for m in members}
    grand_value = value_1x(frozenset(members), BottomPartition.grand(channel, members), inputs)
    return _finish(channel, members, payoffs, dict(payoffs), MacModel.ONE_X, grand_value)


def allocate(
    mac_model: MacModel,
    members: Sequence[int],
    channel: int,
    inputs: CoalitionValueInputs,
) -> PayoffAllocation:
    """Dispatch to the allocation rule of the MAC model"""
    if mac_model is MacModel.ZERO_X:
        return nbs_0x(members, channel, inputs)
    return fnbs_1x(members, channel, inputs)


def allocation_from_sensing(
    mac_model: MacModel,
    fusion_rule: FusionRule,
    channel: int,
    beta: float,
    sensing: Mapping[int, MemberSensing],
) -> PayoffAllocation:
    """Allocation of a channel whose members' FA entries are already known"""
    inputs = grand_coalition_inputs(beta, fusion_rule, sensing)
    return allocate(mac_model, list(sensing), channel, inputs)


def bottom_layer_allocation(
    scenario: NetworkScenario,
    channel: int,
    members: Sequence[int],
    snrs: Optional[Mapping[int, float]] = None,
) -> PayoffAllocation:
    """
    Payoff allocation of one channel's grand coalition from scratch

    Args:
        scenario: Network scenario (powers, fusion rule, MAC model)
        channel: Channel id
        members: SUs on the channel
        snrs: Optional PU-to-SU SNR override per SU

    Returns:
        PayoffAllocation
    """
    members = _check_members(members)
    radio = scenario.radio
    ctx = SensingContext(
        md_budget=radio.md_budget,
        population=len(members),
        num_samples=radio.num_samples,
        fusion_rule=scenario.fusion_rule,
    )
    sensing = {}
    for m in members:
        snr = snrs[m] if snrs is not None else pu_su_snr(scenario, m, channel)
        sensing[m] = detection.member_sensing(ctx, snr)
    return allocation_from_sensing(
        scenario.mac_model, scenario.fusion_rule, channel,
        scenario.channel(channel).availability, sensing,
    )
