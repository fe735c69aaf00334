#!/usr/bin/env python3
"""
Random-direction mobility of SU endpoints

Every node moves at constant speed along its heading; a node reaching the
region boundary stops there and draws a fresh heading for the next slot.
PUs do not move.
"""
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from network_model import NetworkScenario, move_sus


logger = logging.getLogger("coalspec.mobility")


class MobilityError(Exception):
    """Raised on invalid mobility inputs"""
    pass


@dataclass(frozen=True)
class MobilityState:
    """
    Positions (K x 2) and headings (K,) of the mobile nodes

    Node 2m is the transmitter of SU m, node 2m + 1 its receiver.
    """
    positions: np.ndarray
    headings: np.ndarray
    speed_mps: float
    region_side_m: float
    slot_s: float

    def __post_init__(self):
        if self.speed_mps < 0:
            raise MobilityError(f"speed must be nonnegative, got {self.speed_mps}")

    @property
    def num_nodes(self) -> int:
        return len(self.headings)


def _random_headings(rng: np.random.Generator, count: int) -> np.ndarray:
    return rng.uniform(0.0, 2.0 * math.pi, size=count)


def mobility_from_scenario(
    scenario: NetworkScenario,
    speed_mps: float,
    rng: np.random.Generator,
) -> MobilityState:
    """Mobility state for the SU endpoints of a scenario with random headings"""
    positions = np.array(
        [p for su in scenario.sus for p in (su.tx_position, su.rx_position)], dtype=float
    )
    return MobilityState(
        positions=positions,
        headings=_random_headings(rng, len(positions)),
        speed_mps=speed_mps,
        region_side_m=scenario.region_side_m,
        slot_s=scenario.radio.slot_s,
    )


def mobility_step(state: MobilityState, rng: np.random.Generator) -> MobilityState:
    """
    Advance every node by one slot

    Nodes that hit the boundary are clamped onto it and get a new uniform
    heading.
    """
    if state.speed_mps == 0.0 or state.num_nodes == 0:
        return state
    distance = state.speed_mps * state.slot_s
    step = distance * np.column_stack((np.cos(state.headings), np.sin(state.headings)))
    moved = state.positions + step
    clamped = np.clip(moved, 0.0, state.region_side_m)
    hit = np.any(clamped != moved, axis=1)

    headings = state.headings.copy()
    if np.any(hit):
        headings[hit] = _random_headings(rng, int(np.count_nonzero(hit)))
    return replace(state, positions=clamped, headings=headings)


def apply_positions(scenario: NetworkScenario, state: MobilityState) -> NetworkScenario:
    """Scenario with SU endpoints at the mobility state's positions"""
    if state.num_nodes != 2 * scenario.num_sus:
        raise MobilityError("mobility state does not match the SU population")
    positions = {}
    for m in range(scenario.num_sus):
        tx = state.positions[2 * m]
        rx = state.positions[2 * m + 1]
        if tx[0] == rx[0] and tx[1] == rx[1]:
            # both endpoints parked on the same boundary point
            rx = rx + np.where(rx < state.region_side_m / 2, 1e-6, -1e-6)
        positions[m] = ((float(tx[0]), float(tx[1])), (float(rx[0]), float(rx[1])))
    return move_sus(scenario, positions)


def resize_mobility(
    state: MobilityState,
    scenario: NetworkScenario,
    rng: np.random.Generator,
) -> MobilityState:
    """Track a changed SU population: keep surviving nodes, add new ones with random headings"""
    fresh = mobility_from_scenario(scenario, state.speed_mps, rng)
    keep = min(state.num_nodes, fresh.num_nodes)
    headings = fresh.headings.copy()
    headings[:keep] = state.headings[:keep]
    return replace(fresh, headings=headings)
