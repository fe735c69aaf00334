#!/usr/bin/env python3
"""
Network model: geometry, radio parameters and SNR/rate computation

The scenario is immutable; every downstream formula reads positions and
powers from it.
"""
import json
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np


logger = logging.getLogger("coalspec.network_model")

Point = Tuple[float, float]

SCENARIO_SCHEMA_VERSION = 1


class ScenarioError(Exception):
    """Raised when a scenario is invalid or a geometric quantity is undefined"""
    pass


class FusionRule(Enum):
    """How coalition members combine their sensing decisions"""
    AND = "AND"
    OR = "OR"


class MacModel(Enum):
    """Contention model across bottom-layer coalitions on one channel"""
    ZERO_X = "0/X"  # simultaneous detections collide
    ONE_X = "1/X"   # ideal MAC, uniform winner among competing SUs


@dataclass(frozen=True)
class RadioParams:
    """Powers, durations and sensing parameters shared by all users"""
    sense_power_mW: float = 10.0
    tx_power_su_mW: float = 10.0
    tx_power_pu_mW: float = 100.0
    noise_power_mW: float = 0.1
    slot_ms: float = 100.0
    sense_ms: float = 5.0
    num_samples: int = 5
    md_budget: float = 0.01
    path_loss_exponent: float = 2.0

    def __post_init__(self):
        for name in ("sense_power_mW", "tx_power_su_mW", "tx_power_pu_mW", "noise_power_mW"):
            if not getattr(self, name) > 0:
                raise ScenarioError(f"{name} must be positive")
        if not 0.0 < self.md_budget < 1.0:
            raise ScenarioError(f"md_budget must lie in (0, 1), got {self.md_budget}")
        if not 0.0 < self.sense_ms < self.slot_ms:
            raise ScenarioError("sense_ms must satisfy 0 < sense_ms < slot_ms")
        if int(self.num_samples) != self.num_samples or self.num_samples < 1:
            raise ScenarioError("num_samples must be a positive integer")
        if not self.path_loss_exponent > 0:
            raise ScenarioError("path_loss_exponent must be positive")

    @property
    def slot_s(self) -> float:
        return self.slot_ms / 1000.0

    @property
    def sense_s(self) -> float:
        return self.sense_ms / 1000.0

    @property
    def tx_s(self) -> float:
        """Transmission time available in one slot"""
        return (self.slot_ms - self.sense_ms) / 1000.0


@dataclass(frozen=True)
class Channel:
    """A licensed channel and the PU that owns it"""
    id: int
    bandwidth_hz: float
    availability: float
    pu_position: Point

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ScenarioError(f"Channel {self.id}: bandwidth must be positive")
        if not 0.0 <= self.availability <= 1.0:
            raise ScenarioError(f"Channel {self.id}: availability must lie in [0, 1]")


@dataclass(frozen=True)
class SuPair:
    """A secondary transmitter/receiver pair"""
    id: int
    tx_position: Point
    rx_position: Point


@dataclass(frozen=True)
class NetworkScenario:
    """
    Complete, immutable description of one network

    Channel and SU ids are dense: channels[n].id == n and sus[m].id == m.
    """
    region_side_m: float
    radio: RadioParams
    channels: Tuple[Channel, ...]
    sus: Tuple[SuPair, ...]
    fusion_rule: FusionRule = FusionRule.AND
    mac_model: MacModel = MacModel.ZERO_X
    seed: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.region_side_m > 0:
            raise ScenarioError("region_side_m must be positive")
        if len(self.channels) < 1:
            raise ScenarioError("A scenario needs at least one channel")
        if len(self.sus) < 1:
            raise ScenarioError("A scenario needs at least one SU pair")
        for index, channel in enumerate(self.channels):
            if channel.id != index:
                raise ScenarioError(f"Channel ids must be dense, found {channel.id} at {index}")
            self._check_inside(channel.pu_position, f"PU {channel.id}")
        for index, su in enumerate(self.sus):
            if su.id != index:
                raise ScenarioError(f"SU ids must be dense, found {su.id} at {index}")
            self._check_inside(su.tx_position, f"SU {su.id} transmitter")
            self._check_inside(su.rx_position, f"SU {su.id} receiver")

    def _check_inside(self, point: Point, label: str):
        x, y = point
        side = self.region_side_m
        if not (0.0 <= x <= side and 0.0 <= y <= side):
            raise ScenarioError(f"{label} at {point} lies outside the {side} m region")

    @property
    def num_sus(self) -> int:
        return len(self.sus)

    @property
    def num_channels(self) -> int:
        return len(self.channels)

    def channel(self, n: int) -> Channel:
        if not 0 <= n < len(self.channels):
            raise ScenarioError(f"Unknown channel id {n}")
        return self.channels[n]

    def su(self, m: int) -> SuPair:
        if not 0 <= m < len(self.sus):
            raise ScenarioError(f"Unknown SU id {m}")
        return self.sus[m]


def _distance(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def pu_su_snr(scenario: NetworkScenario, m: int, n: int) -> float:
    """
    PU-to-SU SNR per sample, lambda = P_PU d^-alpha / P_N

    The distance is measured from PU n to the transmitter endpoint of pair m,
    where the sensor sits.

    Raises:
        ScenarioError: If the two nodes coincide
    """
    radio = scenario.radio
    d = _distance(scenario.channel(n).pu_position, scenario.su(m).tx_position)
    if d == 0.0:
        raise ScenarioError(f"coincident nodes: PU {n} and SU {m}")
    return radio.tx_power_pu_mW * d ** (-radio.path_loss_exponent) / radio.noise_power_mW


def su_link_snr(scenario: NetworkScenario, m: int) -> float:
    """
    SU-to-SU SNR of pair m, tx power * distance^-alpha / noise power

    Frequency-flat under pure path loss, so one value serves every channel.

    Raises:
        ScenarioError: If the pair endpoints coincide
    """
    radio = scenario.radio
    su = scenario.su(m)
    d = _distance(su.tx_position, su.rx_position)
    if d == 0.0:
        raise ScenarioError(f"coincident nodes: endpoints of SU {m}")
    return radio.tx_power_su_mW * d ** (-radio.path_loss_exponent) / radio.noise_power_mW


def shannon_rate(bandwidth_hz: float, snr: float) -> float:
    """Shannon rate B log2(1 + snr) in bits/s"""
    return bandwidth_hz * math.log2(1.0 + snr)


def data_rate(scenario: NetworkScenario, m: int, n: int) -> float:
    """Shannon rate of pair m on channel n, bandwidth * log2(1 + link SNR)"""
    return shannon_rate(scenario.channel(n).bandwidth_hz, su_link_snr(scenario, m))


# ----------------------------------------------------------------------------
# Scenario generation and resizing
# ----------------------------------------------------------------------------

def _random_point(rng: np.random.Generator, side: float) -> Point:
    x, y = rng.uniform(0.0, side, size=2)
    return (float(x), float(y))


def _draw_su(rng: np.random.Generator, m: int, side: float, pu_positions: Sequence[Point]) -> SuPair:
    """Draw a pair, resampling until no endpoint coincides with a PU or its partner"""
    while True:
        tx = _random_point(rng, side)
        rx = _random_point(rng, side)
        if tx == rx or any(tx == pu for pu in pu_positions):
            logger.debug(f"Resampling coincident placement for SU {m}")
            continue
        return SuPair(id=m, tx_position=tx, rx_position=rx)


def _draw_channel(
    rng: np.random.Generator,
    n: int,
    side: float,
    bandwidth_hz: float,
    availability: float,
    sus: Sequence[SuPair],
) -> Channel:
    while True:
        pu = _random_point(rng, side)
        if any(pu == su.tx_position for su in sus):
            continue
        return Channel(id=n, bandwidth_hz=bandwidth_hz, availability=availability, pu_position=pu)


def generate_scenario(
    num_sus: int,
    num_channels: int,
    seed: int,
    radio: Optional[RadioParams] = None,
    region_side_m: float = 100.0,
    bandwidth_hz: float = 10e6,
    availability: float = 0.2,
    fusion_rule: FusionRule = FusionRule.AND,
    mac_model: MacModel = MacModel.ZERO_X,
) -> NetworkScenario:
    """
    Place all users uniformly at random in the square region

    Args:
        num_sus: Number of SU pairs M
        num_channels: Number of channels/PUs N
        seed: Placement seed, recorded in the scenario

    Returns:
        NetworkScenario
    """
    if num_sus < 1 or num_channels < 1:
        raise ScenarioError("num_sus and num_channels must be at least 1")
    rng = np.random.default_rng(seed)
    radio = radio or RadioParams()

    channels = []
    for n in range(num_channels):
        channels.append(_draw_channel(rng, n, region_side_m, bandwidth_hz, availability, []))
    pu_positions = [c.pu_position for c in channels]
    sus = tuple(_draw_su(rng, m, region_side_m, pu_positions) for m in range(num_sus))

    return NetworkScenario(
        region_side_m=region_side_m,
        radio=radio,
        channels=tuple(channels),
        sus=sus,
        fusion_rule=fusion_rule,
        mac_model=mac_model,
        seed=seed,
    )


def resize_sus(scenario: NetworkScenario, count: int, rng: np.random.Generator) -> NetworkScenario:
    """
    Grow or shrink the SU population

    New pairs are placed uniformly at random; shrinking drops the highest ids.
    """
    if count < 1:
        raise ScenarioError("SU count must be at least 1")
    sus = list(scenario.sus[:count])
    pu_positions = [c.pu_position for c in scenario.channels]
    for m in range(len(sus), count):
        sus.append(_draw_su(rng, m, scenario.region_side_m, pu_positions))
    return replace(scenario, sus=tuple(sus))


def resize_channels(
    scenario: NetworkScenario,
    count: int,
    rng: np.random.Generator,
    bandwidth_hz: Optional[float] = None,
    availability: Optional[float] = None,
) -> NetworkScenario:
    """
    Grow or shrink the channel set

    New channels copy the bandwidth/availability of channel 0 unless given.
    """
    if count < 1:
        raise ScenarioError("Channel count must be at least 1")
    template = scenario.channels[0]
    bandwidth_hz = template.bandwidth_hz if bandwidth_hz is None else bandwidth_hz
    availability = template.availability if availability is None else availability
    channels = list(scenario.channels[:count])
    for n in range(len(channels), count):
        channels.append(_draw_channel(rng, n, scenario.region_side_m, bandwidth_hz, availability, scenario.sus))
    return replace(scenario, channels=tuple(channels))


def move_sus(scenario: NetworkScenario, positions: Dict[int, Tuple[Point, Point]]) -> NetworkScenario:
    """Return a copy with the given SUs moved to new (tx, rx) positions"""
    sus = list(scenario.sus)
    for m, (tx, rx) in positions.items():
        sus[m] = SuPair(id=m, tx_position=tx, rx_position=rx)
    return replace(scenario, sus=tuple(sus))


# ----------------------------------------------------------------------------
# JSON serialization
# ----------------------------------------------------------------------------

def scenario_to_dict(scenario: NetworkScenario) -> Dict[str, Any]:
    """Scenario as a JSON-ready dict"""
    radio = scenario.radio
    return {
        "schema_version": SCENARIO_SCHEMA_VERSION,
        "region_side_m": scenario.region_side_m,
        "seed": scenario.seed,
        "fusion_rule": scenario.fusion_rule.value,
        "mac_model": scenario.mac_model.value,
        "radio": {
            "sense_power_mW": radio.sense_power_mW,
            "tx_power_su_mW": radio.tx_power_su_mW,
            "tx_power_pu_mW": radio.tx_power_pu_mW,
            "noise_power_mW": radio.noise_power_mW,
            "slot_ms": radio.slot_ms,
            "sense_ms": radio.sense_ms,
            "num_samples": radio.num_samples,
            "md_budget": radio.md_budget,
            "path_loss_exponent": radio.path_loss_exponent,
        },
        "channels": [
            {
                "id": c.id,
                "bandwidth_hz": c.bandwidth_hz,
                "availability": c.availability,
                "pu_position": list(c.pu_position),
            }
            for c in scenario.channels
        ],
        "sus": [
            {"id": s.id, "tx_position": list(s.tx_position), "rx_position": list(s.rx_position)}
            for s in scenario.sus
        ],
    }


def scenario_from_dict(data: Dict[str, Any]) -> NetworkScenario:
    """
    Build a scenario from its dict form

    Raises:
        ScenarioError: On missing fields or invalid values
    """
    version = data.get("schema_version", SCENARIO_SCHEMA_VERSION)
    if version != SCENARIO_SCHEMA_VERSION:
        raise ScenarioError(f"Unsupported scenario schema_version: {version}")
    try:
        radio = RadioParams(**data.get("radio", {}))
        channels = tuple(
            Channel(
                id=int(c["id"]),
                bandwidth_hz=float(c["bandwidth_hz"]),
                availability=float(c["availability"]),
                pu_position=(float(c["pu_position"][0]), float(c["pu_position"][1])),
            )
            for c in data["channels"]
        )
        sus = tuple(
            SuPair(
                id=int(s["id"]),
                tx_position=(float(s["tx_position"][0]), float(s["tx_position"][1])),
                rx_position=(float(s["rx_position"][0]), float(s["rx_position"][1])),
            )
            for s in data["sus"]
        )
        return NetworkScenario(
            region_side_m=float(data["region_side_m"]),
            radio=radio,
            channels=channels,
            sus=sus,
            fusion_rule=FusionRule(data.get("fusion_rule", "AND")),
            mac_model=MacModel(data.get("mac_model", "0/X")),
            seed=data.get("seed"),
        )
    except (KeyError, TypeError, IndexError) as e:
        raise ScenarioError(f"Malformed scenario document: {e}") from e
    except ValueError as e:
        raise ScenarioError(f"Invalid scenario value: {e}") from e


def save_scenario(scenario: NetworkScenario, path: Path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(scenario_to_dict(scenario), f, indent=2)


def load_scenario(path: Path) -> NetworkScenario:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return scenario_from_dict(json.load(f))
    except json.JSONDecodeError as e:
        raise ScenarioError(f"Invalid scenario JSON in {path}: {e}") from e
