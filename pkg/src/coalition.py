#!/usr/bin/env python3
"""
Partition-form coalition values for the bottom-layer game

Values under the 0/X and 1/X MAC models, the efficiency identity of 1/X
partitions, the closed-form externality of a merger and the
characteristic-form audit of the 0/X game.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

import numpy as np

import detection
from detection import MemberSensing, SensingContext
from network_model import FusionRule


logger = logging.getLogger("coalspec.coalition")

MAX_OTHER_BLOCKS = 30
MAX_ENUMERATION_PLAYERS = 6
TOLERANCE = 1e-12

Block = FrozenSet[int]


class CoalitionError(Exception):
    """Raised on malformed partitions or guarded enumeration sizes"""
    pass


# ----------------------------------------------------------------------------
# Partitions
# ----------------------------------------------------------------------------

def set_partitions(items: Sequence[int]) -> Iterator[Tuple[Block, ...]]:
    """
    Enumerate every set partition of items

    Yields Bell(len(items)) partitions in a deterministic order.
    """
    items = list(items)
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for partial in set_partitions(rest):
        for index in range(len(partial)):
            yield partial[:index] + (partial[index] | {first},) + partial[index + 1:]
        yield partial + (frozenset([first]),)


@dataclass(frozen=True)
class BottomPartition:
    """Disjoint cooperating coalitions on one channel"""
    channel: int
    blocks: Tuple[Block, ...]

    def __post_init__(self):
        seen = set()
        normalized = []
        for block in self.blocks:
            block = frozenset(block)
            if not block:
                raise CoalitionError("a bottom-layer partition cannot contain an empty block")
            if seen & block:
                raise CoalitionError(f"blocks overlap on SUs {sorted(seen & block)}")
            seen |= block
            normalized.append(block)
        normalized.sort(key=lambda b: min(b))
        object.__setattr__(self, "blocks", tuple(normalized))

    @classmethod
    def grand(cls, channel: int, members: Iterable[int]) -> "BottomPartition":
        return cls(channel=channel, blocks=(frozenset(members),))

    @classmethod
    def singletons(cls, channel: int, members: Iterable[int]) -> "BottomPartition":
        return cls(channel=channel, blocks=tuple(frozenset([m]) for m in members))

    @property
    def members(self) -> Block:
        return frozenset().union(*self.blocks) if self.blocks else frozenset()

    def others(self, target: Block) -> Tuple[Block, ...]:
        """Blocks other than target, in canonical order"""
        target = frozenset(target)
        if target not in self.blocks:
            raise CoalitionError(f"coalition {sorted(target)} is not a block of the partition")
        return tuple(b for b in self.blocks if b != target)

    def merged(self, left: Block, right: Block) -> "BottomPartition":
        """Partition with blocks left and right replaced by their union"""
        left, right = frozenset(left), frozenset(right)
        if left == right or left not in self.blocks or right not in self.blocks:
            raise CoalitionError("merge needs two distinct blocks of the partition")
        rest = tuple(b for b in self.blocks if b not in (left, right))
        return BottomPartition(channel=self.channel, blocks=rest + (left | right,))


@dataclass(frozen=True)
class FaOutcomeVector:
    """FA indicators of the coalitions other than target (1 = false alarm, stays silent)"""
    bits: Tuple[int, ...]

    def probability(self, block_fas: Sequence[float]) -> float:
        if len(block_fas) != len(self.bits):
            raise CoalitionError("outcome vector length does not match the other blocks")
        return math.prod(f if x else 1.0 - f for x, f in zip(self.bits, block_fas))

    def competing(self, block_sizes: Sequence[int]) -> int:
        """Number of SUs outside target competing for access"""
        return sum((1 - x) * s for x, s in zip(self.bits, block_sizes))


def outcome_vectors(length: int) -> Iterator[FaOutcomeVector]:
    for bits in itertools.product((0, 1), repeat=length):
        yield FaOutcomeVector(bits=bits)


# ----------------------------------------------------------------------------
# Value inputs
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class CoalitionValueInputs:
    """Channel availability and the FA probability of any block"""
    beta: float
    block_fa: Callable[[Block], float] = field(compare=False)

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise CoalitionError(f"availability must lie in [0, 1], got {self.beta}")

    def fa(self, block: Block) -> float:
        value = float(self.block_fa(frozenset(block)))
        if not 0.0 <= value <= 1.0:
            raise CoalitionError(f"FA of {sorted(block)} is {value}, outside [0, 1]")
        return value

    @classmethod
    def from_member_fa(cls, beta: float, member_fa: Mapping[int, float]) -> "CoalitionValueInputs":
        """AND fusion of fixed per-member FAs: a block's FA is the product"""
        member_fa = dict(member_fa)

        def block_fa(block: Block) -> float:
            return math.prod(member_fa[m] for m in sorted(block))

        return cls(beta=beta, block_fa=block_fa)

    @classmethod
    def from_sensing(cls, beta: float, ctx: SensingContext, snrs: Mapping[int, float]) -> "CoalitionValueInputs":
        """Block FAs evaluated by the detection module for the context's rule"""
        snrs = dict(snrs)

        def block_fa(block: Block) -> float:
            return detection.coalition_fa(ctx, [snrs[m] for m in sorted(block)])

        return cls(beta=beta, block_fa=block_fa)


def grand_coalition_inputs(
    beta: float,
    fusion_rule: FusionRule,
    sensing: Mapping[int, MemberSensing],
) -> CoalitionValueInputs:
    """
    Value inputs built from precomputed per-SU FA entries

    Covers the blocks the bottom-layer allocation needs: singletons and the whole channel
    population. Under AND any block is available since member thresholds do
    not depend on coalition size.
    """
    sensing = dict(sensing)
    everyone = frozenset(sensing)

    def block_fa(block: Block) -> float:
        members = sorted(block)
        if len(members) == 1:
            return sensing[members[0]].single_fa
        if fusion_rule is FusionRule.AND:
            return detection.combine_fa([sensing[m].single_fa for m in members], FusionRule.AND)
        if block == everyone:
            return detection.combine_fa([sensing[m].grand_fa for m in members], FusionRule.OR)
        raise CoalitionError(
            f"OR-rule FA of intermediate block {members} is not precomputed"
        )

    return CoalitionValueInputs(beta=beta, block_fa=block_fa)


# ----------------------------------------------------------------------------
# Values
# ----------------------------------------------------------------------------

def value_0x(target: Block, partition: BottomPartition, inputs: CoalitionValueInputs) -> float:
    """
    Value of target when simultaneous detections collide

    target transmits only if every other coalition raises a false alarm.
    """
    target = frozenset(target)
    others = partition.others(target)
    return inputs.beta * (1.0 - inputs.fa(target)) * math.prod(inputs.fa(other) for other in others)


def competitor_distribution(block_fas: Sequence[float], block_sizes: Sequence[int]) -> np.ndarray:
    """
    Exact distribution of the number J of competing SUs

    Entry j is Pr(J = j); a block competes with all of its members when it
    detects the idle slot.
    """
    dist = np.ones(1)
    for fa, size in zip(block_fas, block_sizes):
        grown = np.zeros(len(dist) + size)
        grown[:len(dist)] += fa * dist
        grown[size:] += (1.0 - fa) * dist
        dist = grown
    return dist


def _check_other_blocks(count: int):
    if count > MAX_OTHER_BLOCKS:
        raise CoalitionError(
            f"{count} other coalitions exceed the exact expansion limit of {MAX_OTHER_BLOCKS}"
        )


def value_1x(target: Block, partition: BottomPartition, inputs: CoalitionValueInputs) -> float:
    """
    Value of target under an ideal MAC

    target wins the contention with probability |target| / (|target| + J) given J
    competing SUs from the other coalitions.
    """
    target = frozenset(target)
    others = partition.others(target)
    _check_other_blocks(len(others))
    dist = competitor_distribution([inputs.fa(other) for other in others], [len(other) for other in others])
    size = len(target)
    win = float(np.dot(dist, size / (size + np.arange(len(dist)))))
    return inputs.beta * (1.0 - inputs.fa(target)) * win


def value_1x_enumerated(target: Block, partition: BottomPartition, inputs: CoalitionValueInputs) -> float:
    """value_1x by explicit expansion over every FA outcome vector"""
    target = frozenset(target)
    others = partition.others(target)
    _check_other_blocks(len(others))
    fas = [inputs.fa(other) for other in others]
    sizes = [len(other) for other in others]
    size = len(target)
    total = 0.0
    for x in outcome_vectors(len(others)):
        total += x.probability(fas) * size / (size + x.competing(sizes))
    return inputs.beta * (1.0 - inputs.fa(target)) * total


def sum_over_partition_1x(partition: BottomPartition, inputs: CoalitionValueInputs) -> float:
    """Sum of 1/X values over all blocks of a partition"""
    return math.fsum(value_1x(target, partition, inputs) for target in partition.blocks)


def partition_closed_form_1x(partition: BottomPartition, inputs: CoalitionValueInputs) -> float:
    """beta (1 - product of block FAs): the slot is used unless every coalition false-alarms"""
    return inputs.beta * (1.0 - math.prod(inputs.fa(target) for target in partition.blocks))


# ----------------------------------------------------------------------------
# Externality of a merger
# ----------------------------------------------------------------------------

WeightFn = Callable[[int, int, int, int, float, float], float]


def externality_weight(target_size: int, size_1: int, size_2: int, competing: int, fa_1: float, fa_2: float) -> float:
    """Loss in target's win probability from merging left and right, given J competitors elsewhere"""
    b1 = target_size + size_1 + competing
    b2 = target_size + size_2 + competing
    b12 = target_size + size_1 + size_2 + competing
    return (
        (1.0 / b1 - 1.0 / b12) * target_size * fa_2 * (1.0 - fa_1)
        + (1.0 / b2 - 1.0 / b12) * target_size * fa_1 * (1.0 - fa_2)
    )


def externality_delta(
    target: Block,
    left: Block,
    right: Block,
    partition: BottomPartition,
    inputs: CoalitionValueInputs,
    weight_fn: WeightFn = externality_weight,
) -> float:
    """
    value_1x of target before minus after merging left and right

    Evaluated in closed form. The merged coalition's FA must be the product
    of the two FAs (AND fusion).

    Raises:
        CoalitionError: If the blocks are not distinct blocks of the partition,
            or the merged FA is not the product
    """
    target, left, right = frozenset(target), frozenset(left), frozenset(right)
    if len({target, left, right}) != 3:
        raise CoalitionError("target, left and right must be distinct blocks")
    for block in (target, left, right):
        if block not in partition.blocks:
            raise CoalitionError(f"coalition {sorted(block)} is not a block of the partition")

    fa_1, fa_2 = inputs.fa(left), inputs.fa(right)
    if abs(inputs.fa(left | right) - fa_1 * fa_2) > TOLERANCE:
        raise CoalitionError("merged FA is not the product of the merging coalitions' FAs")

    rest = tuple(b for b in partition.blocks if b not in (target, left, right))
    _check_other_blocks(len(rest) + 2)
    dist = competitor_distribution([inputs.fa(b) for b in rest], [len(b) for b in rest])
    expected = math.fsum(
        float(p) * weight_fn(len(target), len(left), len(right), j, fa_1, fa_2)
        for j, p in enumerate(dist)
    )
    return inputs.beta * (1.0 - inputs.fa(target)) * expected


def direct_externality(
    target: Block,
    left: Block,
    right: Block,
    partition: BottomPartition,
    inputs: CoalitionValueInputs,
) -> float:
    """The same difference by evaluating value_1x before and after the merger"""
    return value_1x(target, partition, inputs) - value_1x(target, partition.merged(left, right), inputs)


# ----------------------------------------------------------------------------
# Characteristic-form audit (0/X)
# ----------------------------------------------------------------------------

@dataclass
class CharacteristicFormReport:
    players: Tuple[int, ...]
    partition_independent: bool = True
    superadditive: bool = True
    grand_efficient: bool = True
    partitions_checked: int = 0
    counterexample: Optional[Dict] = None

    @property
    def passed(self) -> bool:
        return self.partition_independent and self.superadditive and self.grand_efficient

    def fail(self, attribute: str, detail: Dict):
        setattr(self, attribute, False)
        if self.counterexample is None:
            self.counterexample = {"property": attribute, **detail}


def characteristic_value_0x(target: Block, players: Sequence[int], inputs: CoalitionValueInputs) -> float:
    """0/X value of target with every outsider on its own"""
    target = frozenset(target)
    outside = [m for m in players if m not in target]
    partition = BottomPartition(channel=0, blocks=(target,) + tuple(frozenset([m]) for m in outside))
    return value_0x(target, partition, inputs)


def check_characteristic_form_0x(players: Sequence[int], inputs: CoalitionValueInputs) -> CharacteristicFormReport:
    """
    Audit the 0/X game over every partition of players

    Checks that a coalition's value ignores how outsiders are organized,
    superadditivity on all disjoint pairs, and that no partition beats the
    grand coalition.

    Raises:
        CoalitionError: If there are more than six players
    """
    players = tuple(sorted(players))
    if len(players) > MAX_ENUMERATION_PLAYERS:
        raise CoalitionError(
            f"characteristic-form audit limited to {MAX_ENUMERATION_PLAYERS} players, got {len(players)}"
        )
    report = CharacteristicFormReport(players=players)
    if not players:
        return report

    reference: Dict[Block, float] = {}
    for size in range(1, len(players) + 1):
        for subset in itertools.combinations(players, size):
            block = frozenset(subset)
            reference[block] = characteristic_value_0x(block, players, inputs)

    grand = reference[frozenset(players)]
    for blocks in set_partitions(players):
        partition = BottomPartition(channel=0, blocks=blocks)
        report.partitions_checked += 1
        total = 0.0
        for target in partition.blocks:
            value = value_0x(target, partition, inputs)
            total += value
            if abs(value - reference[target]) > TOLERANCE:
                report.fail("partition_independent", {
                    "coalition": sorted(target),
                    "partition": [sorted(b) for b in partition.blocks],
                    "value": value,
                    "reference": reference[target],
                })
        if total > grand + TOLERANCE:
            report.fail("grand_efficient", {
                "partition": [sorted(b) for b in partition.blocks],
                "sum": total,
                "grand": grand,
            })

    blocks = list(reference)
    for target, other in itertools.combinations(blocks, 2):
        if target & other:
            continue
        joint = reference[target | other]
        if joint < reference[target] + reference[other] - TOLERANCE:
            report.fail("superadditive", {
                "coalitions": [sorted(target), sorted(other)],
                "joint": joint,
                "separate": reference[target] + reference[other],
            })

    logger.debug(
        f"0/X audit of {len(players)} players over {report.partitions_checked} partitions: "
        f"{'pass' if report.passed else 'FAIL'}"
    )
    return report
