"""Shared fixtures; puts src/ on the import path the way the scripts do"""
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from network_model import (  # noqa: E402
    Channel,
    FusionRule,
    MacModel,
    NetworkScenario,
    RadioParams,
    SuPair,
    generate_scenario,
)


def make_scenario(
    pu_positions,
    su_pairs,
    availability=0.2,
    fusion_rule=FusionRule.AND,
    mac_model=MacModel.ZERO_X,
    radio=None,
):
    """Hand-placed scenario; su_pairs is a list of (tx, rx) points"""
    return NetworkScenario(
        region_side_m=100.0,
        radio=radio or RadioParams(),
        channels=tuple(
            Channel(id=n, bandwidth_hz=10e6, availability=availability, pu_position=p)
            for n, p in enumerate(pu_positions)
        ),
        sus=tuple(SuPair(id=m, tx_position=tx, rx_position=rx) for m, (tx, rx) in enumerate(su_pairs)),
        fusion_rule=fusion_rule,
        mac_model=mac_model,
    )


@pytest.fixture
def small_scenario():
    """Two channels, four SUs; PU 0 in the lower-left, PU 1 in the upper-right"""
    return make_scenario(
        pu_positions=[(10.0, 10.0), (90.0, 90.0)],
        su_pairs=[
            ((20.0, 20.0), (25.0, 20.0)),
            ((30.0, 15.0), (30.0, 25.0)),
            ((80.0, 70.0), (75.0, 70.0)),
            ((60.0, 85.0), (60.0, 80.0)),
        ],
    )


@pytest.fixture
def paper_scenario():
    """M=10, N=5 random placement"""
    return generate_scenario(num_sus=10, num_channels=5, seed=3)


@pytest.fixture
def preset_dir():
    return Path(__file__).parent.parent / "config" / "presets"
