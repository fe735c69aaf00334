#!/usr/bin/env python3
"""
Switch meter for measuring channel-switch frequency
Counts switches in a sliding window of simulated time
"""
import logging
from collections import deque
from typing import Deque, Optional


logger = logging.getLogger("coalspec.switch_meter")


class SwitchMeter:
    """
    Sliding window switch counter

    Features:
    - Window measured in slots (not fixed minute boundaries)
    - Rate reported in switches per minute of simulated time
    - Shorter spans inside the window for partial metric windows
    """

    def __init__(self, slot_ms: float, window_slots: int = 600):
        """
        Initialize switch meter

        Args:
            slot_ms: Slot duration in milliseconds
            window_slots: Sliding window length in slots
        """
        if slot_ms <= 0 or window_slots < 1:
            raise ValueError("slot_ms must be positive and window_slots at least 1")
        self.slot_ms = slot_ms
        self.window_slots = window_slots
        self.total = 0
        self._slots: Deque[int] = deque()

    def record_switch(self, slot: int):
        """Record that a switch happened in the given slot"""
        if self._slots and slot < self._slots[-1]:
            raise ValueError(f"switch slot {slot} precedes the last recorded slot {self._slots[-1]}")
        self._slots.append(slot)
        self.total += 1
        logger.debug(f"Switch recorded at slot {slot}")

    def _prune(self, slot: int):
        oldest = slot - self.window_slots
        while self._slots and self._slots[0] <= oldest:
            self._slots.popleft()

    def _span(self, span: Optional[int]) -> int:
        if span is None:
            return self.window_slots
        if not 1 <= span <= self.window_slots:
            raise ValueError(f"span must be in [1, {self.window_slots}], got {span}")
        return span

    def switches_in_window(self, slot: int, span: Optional[int] = None) -> int:
        """Switches in the span slots ending at (and including) slot"""
        self._prune(slot)
        oldest = slot - self._span(span)
        return sum(1 for s in self._slots if oldest < s <= slot)

    def switches_per_minute(self, slot: int, span: Optional[int] = None) -> float:
        """Windowed switch frequency; a span reaching before slot 0 is cut to the slots run"""
        covered_slots = min(self._span(span), slot + 1)
        minutes = covered_slots * self.slot_ms / 60000.0
        return self.switches_in_window(slot, span) / minutes


def overall_switches_per_minute(switches: int, slots: int, slot_ms: float) -> float:
    """Average switch frequency over a whole run"""
    if slots <= 0:
        return 0.0
    return switches / (slots * slot_ms / 60000.0)
