import math

import numpy as np
import pytest

from bargaining import (
    BargainingError,
    allocate,
    bottom_layer_allocation,
    fnbs_1x,
    nbs_0x,
    slot_shares,
)
from coalition import CoalitionValueInputs
from conftest import make_scenario
from network_model import MacModel


def inputs_for(fas, beta=0.2):
    return CoalitionValueInputs.from_member_fa(beta, dict(enumerate(fas)))


def test_slot_shares_example():
    shares = slot_shares({1: 0.2, 2: 0.6})
    assert shares == {1: pytest.approx(0.25), 2: pytest.approx(0.75)}
    assert slot_shares({4: 0.3}) == {4: 1.0}
    assert slot_shares({0: 0.1, 1: 0.1, 2: 0.1}) == {m: pytest.approx(1 / 3) for m in range(3)}


def test_slot_shares_rejects_degenerate_coalition():
    with pytest.raises(BargainingError, match="degenerate"):
        slot_shares({0: 0.0, 1: 0.0})


def test_nbs_single_su_gets_its_standalone_value():
    allocation = nbs_0x([0], 3, inputs_for([0.4]))
    assert allocation.payoff(0) == pytest.approx(0.2 * 0.6)
    assert allocation.slot_shares == {0: 1.0}
    assert allocation.channel == 3
    with pytest.raises(BargainingError):
        allocation.payoff(1)


def test_nbs_identical_sus_split_equally():
    allocation = nbs_0x([0, 1], 0, inputs_for([0.3, 0.3]))
    assert allocation.payoffs[0] == pytest.approx(allocation.payoffs[1])
    assert allocation.total == pytest.approx(0.2 * (1 - 0.09))


def test_nbs_properties_on_random_coalitions():
    rng = np.random.default_rng(0)
    for _ in range(100):
        size = int(rng.integers(2, 7))
        fas = rng.uniform(0, 1, size=size)
        beta = float(rng.uniform(0.05, 1.0))
        allocation = nbs_0x(range(size), 0, inputs_for(fas, beta))
        surplus = [allocation.payoffs[m] - allocation.disagreement.values[m] for m in range(size)]
        assert abs(allocation.total - beta * (1 - math.prod(fas))) <= 1e-12
        assert min(surplus) >= -1e-12
        assert max(surplus) - min(surplus) <= 1e-12
        assert sum(allocation.slot_shares.values()) == pytest.approx(1.0)


def test_nbs_rewards_better_sensing():
    base = [0.5, 0.4, 0.6]
    before = nbs_0x(range(3), 0, inputs_for(base))
    after = nbs_0x(range(3), 0, inputs_for([0.2, 0.4, 0.6]))
    assert after.payoffs[0] >= before.payoffs[0]


def test_fnbs_single_su():
    allocation = fnbs_1x([5], 0, inputs_for([0.0, 0.0, 0.0, 0.0, 0.0, 0.25]))
    assert allocation.payoffs == {5: pytest.approx(0.2 * 0.75)}


def test_fnbs_symmetric_and_efficient():
    allocation = fnbs_1x(range(2), 0, inputs_for([0.5, 0.5]))
    assert allocation.payoffs[0] == pytest.approx(allocation.payoffs[1])

    fas = [0.1, 0.4, 0.7, 0.2]
    allocation = fnbs_1x(range(4), 0, inputs_for(fas, beta=0.3))
    assert abs(allocation.total - 0.3 * (1 - math.prod(fas))) <= 1e-12
    assert allocation.disagreement.values == allocation.payoffs
    assert allocation.mac_model is MacModel.ONE_X


def test_degenerate_coalition_is_silent():
    allocation = nbs_0x([0, 1], 0, inputs_for([1.0, 1.0]))
    assert allocation.degenerate
    assert allocation.slot_shares == {}


def test_allocate_dispatches_on_mac_model():
    inputs = inputs_for([0.3, 0.6])
    assert allocate(MacModel.ZERO_X, [0, 1], 0, inputs).mac_model is MacModel.ZERO_X
    assert allocate(MacModel.ONE_X, [0, 1], 0, inputs).mac_model is MacModel.ONE_X


def test_members_are_validated():
    with pytest.raises(BargainingError):
        nbs_0x([], 0, inputs_for([0.5]))
    with pytest.raises(BargainingError, match="duplicate"):
        nbs_0x([0, 0], 0, inputs_for([0.5]))


def test_bottom_layer_allocation_from_scenario(small_scenario):
    allocation = bottom_layer_allocation(small_scenario, 0, [0, 1])
    assert allocation.members == (0, 1)
    assert allocation.total == pytest.approx(allocation.coalition_value)
    assert allocation.total <= small_scenario.channel(0).availability


def test_bottom_layer_allocation_snr_override():
    scenario = make_scenario([(0.0, 0.0)], [((10.0, 0.0), (10.0, 5.0)), ((20.0, 0.0), (20.0, 5.0))])
    equal = bottom_layer_allocation(scenario, 0, [0, 1], snrs={0: 3.0, 1: 3.0})
    assert equal.payoffs[0] == pytest.approx(equal.payoffs[1])
