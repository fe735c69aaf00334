import math

import numpy as np
import pytest

from coalition import (
    BottomPartition,
    CoalitionError,
    CoalitionValueInputs,
    FaOutcomeVector,
    check_characteristic_form_0x,
    competitor_distribution,
    direct_externality,
    externality_delta,
    externality_weight,
    grand_coalition_inputs,
    outcome_vectors,
    partition_closed_form_1x,
    set_partitions,
    sum_over_partition_1x,
    value_0x,
    value_1x,
    value_1x_enumerated,
)
from detection import SensingContext, member_sensing
from network_model import FusionRule


def block(*members):
    return frozenset(members)


def member_inputs(fas, beta=0.2):
    return CoalitionValueInputs.from_member_fa(beta, dict(enumerate(fas)))


@pytest.mark.parametrize("n,bell", [(0, 1), (1, 1), (2, 2), (3, 5), (4, 15), (5, 52), (6, 203)])
def test_set_partitions_counts_bell_numbers(n, bell):
    partitions = list(set_partitions(range(n)))
    assert len(partitions) == bell
    assert len({frozenset(p) for p in partitions}) == bell
    for p in partitions:
        assert sorted(m for b in p for m in b) == list(range(n))


def test_bottom_partition_normalizes_and_validates():
    p = BottomPartition(channel=0, blocks=({3, 4}, {0}, {1, 2}))
    assert p.blocks == (block(0), block(1, 2), block(3, 4))
    assert p.members == block(0, 1, 2, 3, 4)
    assert p.others(block(1, 2)) == (block(0), block(3, 4))
    with pytest.raises(CoalitionError, match="overlap"):
        BottomPartition(channel=0, blocks=({0, 1}, {1}))
    with pytest.raises(CoalitionError, match="empty"):
        BottomPartition(channel=0, blocks=(set(),))
    with pytest.raises(CoalitionError):
        p.others(block(0, 1))


def test_merged_partition():
    p = BottomPartition.singletons(0, range(3))
    assert p.merged(block(0), block(2)).blocks == (block(0, 2), block(1))
    with pytest.raises(CoalitionError):
        p.merged(block(0), block(0))


def test_outcome_vector_probability_and_competitors():
    x = FaOutcomeVector(bits=(1, 0))
    assert x.probability([0.3, 0.4]) == pytest.approx(0.3 * 0.6)
    assert x.competing([2, 3]) == 3
    assert math.fsum(v.probability([0.3, 0.4, 0.9]) for v in outcome_vectors(3)) == pytest.approx(1.0)


def test_value_0x_examples():
    inputs = member_inputs([0.3, 0.5, 0.0])
    alone = BottomPartition.grand(0, [0])
    assert value_0x(block(0), alone, inputs) == pytest.approx(0.2 * 0.7)
    p = BottomPartition.singletons(0, range(3))
    # SU 2 never false-alarms, so everyone else always collides with it
    assert value_0x(block(0), p, inputs) == 0.0
    p2 = BottomPartition.singletons(0, range(2))
    assert value_0x(block(0), p2, inputs) == pytest.approx(0.2 * 0.7 * 0.5)


def test_value_1x_examples():
    inputs = member_inputs([0.0, 0.0])
    p = BottomPartition.singletons(0, range(2))
    assert value_1x(block(0), p, inputs) == pytest.approx(0.1)
    alone = BottomPartition.grand(0, [0, 1])
    assert value_1x(block(0, 1), alone, inputs) == pytest.approx(0.2)


def test_competitor_distribution_sums_to_one():
    dist = competitor_distribution([0.2, 0.7, 0.5], [1, 2, 3])
    assert len(dist) == 7
    assert dist.sum() == pytest.approx(1.0)
    assert dist[0] == pytest.approx(0.2 * 0.7 * 0.5)
    assert dist[6] == pytest.approx(0.8 * 0.3 * 0.5)


def test_value_1x_matches_enumeration():
    rng = np.random.default_rng(5)
    for _ in range(20):
        inputs = member_inputs(rng.uniform(0, 1, size=7))
        p = BottomPartition(channel=0, blocks=({0, 1}, {2}, {3, 4, 5}, {6}))
        for target in p.blocks:
            assert value_1x(target, p, inputs) == pytest.approx(value_1x_enumerated(target, p, inputs), abs=1e-14)


def test_value_1x_matches_monte_carlo():
    rng = np.random.default_rng(9)
    fas = [0.3, 0.6, 0.2, 0.5, 0.4]
    inputs = member_inputs(fas, beta=1.0)
    p = BottomPartition(channel=0, blocks=({0}, {1, 2}, {3}, {4}))
    target = block(0)
    block_fas = [inputs.fa(b) for b in p.blocks]
    sizes = [len(b) for b in p.blocks]
    trials = 200_000
    alarms = rng.random((trials, len(p.blocks))) < np.array(block_fas)
    detecting = ~alarms
    competitors = (detecting[:, 1:] * np.array(sizes[1:])).sum(axis=1)
    wins = np.where(detecting[:, 0], 1.0 / (1.0 + competitors), 0.0)
    estimate = wins.mean()
    sigma = wins.std() / math.sqrt(trials)
    assert abs(value_1x(target, p, inputs) - estimate) <= 3.0 * sigma


def test_value_1x_refuses_huge_partitions():
    inputs = member_inputs([0.5] * 32)
    p = BottomPartition.singletons(0, range(32))
    with pytest.raises(CoalitionError, match="limit"):
        value_1x(block(0), p, inputs)


def test_equal_efficiency_over_all_partitions_of_five():
    rng = np.random.default_rng(1)
    for _ in range(10):
        inputs = member_inputs(rng.uniform(0, 1, size=5), beta=float(rng.uniform(0.1, 1.0)))
        expected = inputs.beta * (1.0 - math.prod(inputs.fa(block(m)) for m in range(5)))
        for blocks in set_partitions(range(5)):
            p = BottomPartition(channel=0, blocks=blocks)
            assert abs(sum_over_partition_1x(p, inputs) - expected) <= 1e-12
            assert abs(partition_closed_form_1x(p, inputs) - expected) <= 1e-12


def test_externality_closed_form_matches_direct_and_is_nonnegative():
    rng = np.random.default_rng(2)
    for _ in range(200):
        inputs = member_inputs(rng.uniform(0, 1, size=6))
        p = BottomPartition(channel=0, blocks=({0}, {1, 2}, {3}, {4, 5}))
        target, left, right = block(1, 2), block(0), block(4, 5)
        closed = externality_delta(target, left, right, p, inputs)
        assert abs(closed - direct_externality(target, left, right, p, inputs)) <= 1e-12
        assert closed >= -1e-15


def test_externality_vanishes_when_mergers_always_false_alarm():
    inputs = member_inputs([0.4, 1.0, 1.0])
    p = BottomPartition.singletons(0, range(3))
    assert externality_delta(block(0), block(1), block(2), p, inputs) == 0.0


def test_externality_sign_flip_is_detected():
    inputs = member_inputs([0.2, 0.3, 0.4])
    p = BottomPartition.singletons(0, range(3))
    flipped = externality_delta(
        block(0), block(1), block(2), p, inputs,
        weight_fn=lambda *args: -externality_weight(*args),
    )
    assert flipped < 0.0
    assert abs(flipped - direct_externality(block(0), block(1), block(2), p, inputs)) > 1e-6


def test_externality_requires_distinct_blocks_and_product_fa():
    inputs = member_inputs([0.2, 0.3, 0.4])
    p = BottomPartition.singletons(0, range(3))
    with pytest.raises(CoalitionError):
        externality_delta(block(0), block(1), block(1), p, inputs)
    odd = CoalitionValueInputs(beta=0.2, block_fa=lambda b: 0.5)
    with pytest.raises(CoalitionError, match="product"):
        externality_delta(block(0), block(1), block(2), p, odd)


@pytest.mark.parametrize("players", [1, 4, 6])
def test_characteristic_form_audit_passes(players):
    rng = np.random.default_rng(players)
    report = check_characteristic_form_0x(range(players), member_inputs(rng.uniform(0, 1, size=players)))
    assert report.passed, report.counterexample


def test_characteristic_form_audit_guard():
    with pytest.raises(CoalitionError):
        check_characteristic_form_0x(range(7), member_inputs([0.5] * 7))


def test_characteristic_form_audit_reports_counterexample():
    # a block FA that is not the product breaks superadditivity
    inputs = CoalitionValueInputs(beta=1.0, block_fa=lambda b: 0.1 if len(b) == 1 else 0.99)
    report = check_characteristic_form_0x(range(3), inputs)
    assert not report.passed
    assert report.superadditive is False
    assert report.counterexample is not None


def test_grand_coalition_inputs():
    and_ctx = SensingContext(md_budget=0.01, population=3, num_samples=5)
    sensing = {m: member_sensing(and_ctx, snr) for m, snr in enumerate((1.0, 2.0, 4.0))}
    inputs = grand_coalition_inputs(0.2, FusionRule.AND, sensing)
    assert inputs.fa(block(0, 2)) == pytest.approx(sensing[0].single_fa * sensing[2].single_fa)

    or_ctx = SensingContext(md_budget=0.01, population=3, num_samples=5, fusion_rule=FusionRule.OR)
    sensing = {m: member_sensing(or_ctx, snr) for m, snr in enumerate((1.0, 2.0, 4.0))}
    inputs = grand_coalition_inputs(0.2, FusionRule.OR, sensing)
    assert inputs.fa(block(1)) == sensing[1].single_fa
    expected = 1.0 - math.prod(1.0 - sensing[m].grand_fa for m in range(3))
    assert inputs.fa(block(0, 1, 2)) == pytest.approx(expected)
    with pytest.raises(CoalitionError, match="intermediate"):
        inputs.fa(block(0, 1))


def test_value_inputs_from_sensing_uses_detection():
    ctx = SensingContext(md_budget=0.01, population=2, num_samples=5)
    inputs = CoalitionValueInputs.from_sensing(0.2, ctx, {0: 1.0, 1: 3.0})
    assert 0.0 < inputs.fa(block(0, 1)) < inputs.fa(block(0))
    with pytest.raises(CoalitionError):
        CoalitionValueInputs(beta=1.5, block_fa=lambda b: 0.5)
