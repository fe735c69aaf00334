import math

import numpy as np
import pytest
from scipy import stats

import detection
from coalition import set_partitions
from detection import (
    DetectionError,
    SensingContext,
    coalition_fa,
    coalition_md_target,
    combine_fa,
    count_fa_computations,
    evaluate_coalition,
    fa_for_md,
    fa_from_threshold,
    fa_split_sweep,
    individual_fa,
    individual_md,
    integrated_md,
    member_sensing,
    quasiconcavity_conditions,
    q_func,
    q_inv,
)
from network_model import FusionRule


@pytest.mark.parametrize("x", [-3.0, -0.5, 0.0, 1.0, 4.0, 8.0])
def test_q_func_matches_normal_tail(x):
    assert q_func(x) == pytest.approx(stats.norm.sf(x), rel=1e-12)


@pytest.mark.parametrize("p", [1e-12, 1e-4, 0.01, 0.3, 0.5, 0.9, 0.99, 1 - 1e-9])
def test_q_inv_inverts_q_func(p):
    assert q_func(q_inv(p)) == pytest.approx(p, rel=1e-10)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_q_inv_domain(p):
    with pytest.raises(DetectionError, match="domain"):
        q_inv(p)


def test_coalition_md_target_grand_coalition_takes_whole_budget():
    ctx = SensingContext(md_budget=0.01, population=4, num_samples=5)
    assert coalition_md_target(ctx, 4) == pytest.approx(0.01, abs=1e-15)
    assert coalition_md_target(ctx, 1) == pytest.approx(1 - 0.99 ** 0.25, abs=1e-15)
    with pytest.raises(DetectionError):
        coalition_md_target(ctx, 5)


@pytest.mark.parametrize("budget", [1e-4, 0.01, 0.1])
@pytest.mark.parametrize("size", range(1, 7))
def test_integrated_md_conserves_budget(budget, size):
    ctx = SensingContext(md_budget=budget, population=size, num_samples=5)
    for blocks in set_partitions(range(size)):
        assert abs(integrated_md(ctx, [len(b) for b in blocks]) - budget) <= 1e-12


def test_integrated_md_requires_cover():
    ctx = SensingContext(md_budget=0.01, population=3, num_samples=5)
    with pytest.raises(DetectionError, match="cover"):
        integrated_md(ctx, [1, 1])


@pytest.mark.parametrize("rule", [FusionRule.AND, FusionRule.OR])
@pytest.mark.parametrize("size", [1, 2, 5])
def test_individual_md_reproduces_coalition_md(rule, size):
    md = 0.02
    p = individual_md(md, size, rule)
    fused = 1 - (1 - p) ** size if rule is FusionRule.AND else p ** size
    assert fused == pytest.approx(md, rel=1e-12)


def test_individual_fa_examples():
    # zero SNR: FA = 1 - MD_i
    assert individual_fa(0.0, 5, 0.1) == pytest.approx(0.9, rel=1e-12)
    # FA decreases in SNR at fixed MD
    fas = [individual_fa(snr, 5, 0.01) for snr in (0.0, 0.5, 1.0, 5.0)]
    assert all(a > b for a, b in zip(fas, fas[1:]))
    with pytest.raises(DetectionError):
        individual_fa(1.0, 5, 1.0)
    with pytest.raises(DetectionError):
        fa_from_threshold(-1.0, 5, 0.0)


def test_combine_fa_rules():
    assert combine_fa([0.5, 0.2], FusionRule.AND) == pytest.approx(0.1)
    assert combine_fa([0.5, 0.2], FusionRule.OR) == pytest.approx(0.6)
    with pytest.raises(DetectionError):
        combine_fa([], FusionRule.AND)


def test_combine_fa_large_coalitions_stay_finite():
    assert combine_fa([0.5] * 30, FusionRule.AND) == pytest.approx(0.5 ** 30, rel=1e-12)
    assert combine_fa([0.0, 0.5], FusionRule.AND) > 0.0
    assert 0.0 < combine_fa([1e-20] * 40, FusionRule.OR) <= 1.0


def test_coalition_fa_single_member_equals_individual():
    ctx = SensingContext(md_budget=0.01, population=1, num_samples=5)
    assert coalition_fa(ctx, [2.0]) == pytest.approx(individual_fa(2.0, 5, 0.01))


def test_coalition_fa_validates_size_and_rule_override():
    ctx = SensingContext(md_budget=0.01, population=3, num_samples=5)
    with pytest.raises(DetectionError):
        coalition_fa(ctx, [1.0, 2.0], coalition_size=3)
    and_fa = coalition_fa(ctx, [1.0, 2.0])
    or_fa = coalition_fa(ctx, [1.0, 2.0], fusion_rule=FusionRule.OR)
    assert and_fa != or_fa


def test_evaluate_coalition_is_consistent():
    ctx = SensingContext(md_budget=0.01, population=3, num_samples=5)
    sensing = evaluate_coalition(ctx, [1.0, 3.0])
    assert sensing.coalition_md == pytest.approx(coalition_md_target(ctx, 2))
    assert sensing.coalition_fa == pytest.approx(math.prod(sensing.member_fas))
    fa, member_fas, threshold = fa_for_md([1.0, 3.0], sensing.coalition_md, 5, FusionRule.AND)
    assert threshold == sensing.threshold and list(sensing.member_fas) == member_fas


def test_member_sensing_entries():
    and_ctx = SensingContext(md_budget=0.01, population=4, num_samples=5)
    entry = member_sensing(and_ctx, 2.0)
    assert entry.single_fa == entry.grand_fa
    or_ctx = SensingContext(md_budget=0.01, population=4, num_samples=5, fusion_rule=FusionRule.OR)
    entry = member_sensing(or_ctx, 2.0)
    assert entry.single_fa == pytest.approx(coalition_fa(or_ctx, [2.0]))
    assert entry.grand_fa == pytest.approx(individual_fa(2.0, 5, 0.01 ** 0.25))


def test_fa_tally_counts_member_sensing_calls_only():
    ctx = SensingContext(md_budget=0.01, population=3, num_samples=5)
    with count_fa_computations() as tally:
        for snr in (1.0, 2.0, 3.0):
            member_sensing(ctx, snr)
        coalition_fa(ctx, [1.0, 2.0])
    assert tally.count == 3
    member_sensing(ctx, 1.0)
    assert tally.count == 3


def test_split_sweep_peaks_at_equal_split():
    curve = fa_split_sweep(mean_snr=5.0, md_coalition=1e-4, num_samples=5, points=101)
    assert len(curve) == 101
    fa_and = [p.fa_and for p in curve]
    fa_or = [p.fa_or for p in curve]
    assert int(np.argmax(fa_and)) == 50
    assert int(np.argmin(fa_or)) == 50
    assert fa_and[0] < fa_or[0] and fa_and[-1] < fa_or[-1]
    for p in curve:
        assert p.snr_1 + p.snr_2 == pytest.approx(10.0)


def test_split_sweep_needs_two_points():
    with pytest.raises(DetectionError):
        fa_split_sweep(5.0, 1e-4, 5, points=1)


def test_quasiconcavity_conditions():
    ctx = SensingContext(md_budget=1e-4, population=2, num_samples=5)
    assert quasiconcavity_conditions(ctx, 2, [5.0, 10.0], md_coalition=1e-4) == (True, True)
    # sufficient only: a silent member with few samples fails the threshold bound
    assert quasiconcavity_conditions(ctx, 2, [0.0], md_coalition=1e-4) == (True, False)
    md_ok, _ = quasiconcavity_conditions(ctx, 2, [5.0], md_coalition=0.3)
    assert md_ok is False


def test_threshold_cache_returns_same_value():
    detection.detection_threshold.cache_clear()
    first = detection.detection_threshold(0.01, 3, FusionRule.OR)
    second = detection.detection_threshold(0.01, 3, FusionRule.OR)
    assert first == second
    assert detection.detection_threshold.cache_info().hits >= 1


def test_and_fusion_threshold_independent_of_size():
    # the AND member MD for coalition MD 1-(1-P)^(k/S) is the same for every k
    ctx = SensingContext(md_budget=0.01, population=6, num_samples=5)
    thresholds = {
        round(detection.detection_threshold(coalition_md_target(ctx, k), k, FusionRule.AND), 9)
        for k in range(1, 7)
    }
    assert len(thresholds) == 1


def random_snrs(rng, size):
    return [float(s) for s in rng.uniform(0.5, 10.0, size=size)]


@pytest.mark.parametrize("rule", [FusionRule.AND, FusionRule.OR])
def test_larger_population_raises_coalition_fa(rule):
    rng = np.random.default_rng(31)
    for _ in range(20):
        snrs = random_snrs(rng, int(rng.integers(1, 5)))
        fas = [
            coalition_fa(SensingContext(md_budget=0.01, population=s, num_samples=5, fusion_rule=rule), snrs)
            for s in range(len(snrs), len(snrs) + 6)
        ]
        assert all(a < b for a, b in zip(fas, fas[1:])), (snrs, fas)


def test_fusion_bounds_against_member_fas():
    rng = np.random.default_rng(32)
    for _ in range(50):
        size = int(rng.integers(1, 26))
        snrs = random_snrs(rng, size)
        and_sensing = evaluate_coalition(SensingContext(md_budget=0.01, population=size, num_samples=5), snrs)
        or_sensing = evaluate_coalition(
            SensingContext(md_budget=0.01, population=size, num_samples=5, fusion_rule=FusionRule.OR), snrs
        )
        assert and_sensing.coalition_fa <= min(and_sensing.member_fas) * (1 + 1e-12)
        assert or_sensing.coalition_fa >= max(or_sensing.member_fas) * (1 - 1e-12)


def test_or_fusion_with_certain_false_alarm(recwarn):
    assert combine_fa([1.0, 0.3], FusionRule.OR) == 1.0
    assert combine_fa([1.0] * 25, FusionRule.OR) == 1.0
    assert not [w for w in recwarn if issubclass(w.category, RuntimeWarning)]


def test_md_condition_fails_for_twenty_members():
    # 1e-4 exceeds 0.5 ** 20
    ctx = SensingContext(md_budget=1e-4, population=20, num_samples=5)
    md_ok, _ = quasiconcavity_conditions(ctx, 20, [5.0], md_coalition=1e-4)
    assert md_ok is False


def test_threshold_condition_holds_for_two_samples_at_snr_ten():
    ctx = SensingContext(md_budget=1e-4, population=2, num_samples=2)
    _, threshold_ok = quasiconcavity_conditions(ctx, 2, [10.0], md_coalition=1e-4)
    assert threshold_ok is True
