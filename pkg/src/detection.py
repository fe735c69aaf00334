#!/usr/bin/env python3
"""
Energy-detection statistics

Q-function machinery, distribution of the channel MD budget over bottom-layer
coalitions, individual and coalition false-alarm probabilities under AND/OR
fusion, and the quasiconcavity conditions for two-member coalitions.
"""
import contextvars
import functools
import logging
import math
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np
from scipy import optimize, special

from network_model import FusionRule


logger = logging.getLogger("coalspec.detection")

FA_FLOOR = 1e-300
LOG_SPACE_MIN_MEMBERS = 20

_SQRT2 = math.sqrt(2.0)


class DetectionError(Exception):
    """Raised on probability-domain violations"""
    pass


# ----------------------------------------------------------------------------
# FA-computation tally
# ----------------------------------------------------------------------------

_fa_tally: contextvars.ContextVar = contextvars.ContextVar("fa_tally", default=None)


class FaTally:
    """Counter of per-SU FA computations performed inside a tally scope"""

    def __init__(self):
        self.count = 0


@contextmanager
def count_fa_computations() -> Iterator[FaTally]:
    """
    Count calls to member_sensing made inside the block

    Usage:
        with count_fa_computations() as tally:
            ...
        tally.count
    """
    tally = FaTally()
    token = _fa_tally.set(tally)
    try:
        yield tally
    finally:
        _fa_tally.reset(token)


def _record_fa_computation():
    tally = _fa_tally.get()
    if tally is not None:
        tally.count += 1


# ----------------------------------------------------------------------------
# Q-function
# ----------------------------------------------------------------------------

def q_func(x: float) -> float:
    """Upper-tail standard normal probability Q(x) = 0.5 erfc(x / sqrt(2))"""
    return float(0.5 * special.erfc(x / _SQRT2))


def q_inv(p: float) -> float:
    """
    Inverse Q-function

    Starts from the normal quantile and polishes with Newton steps; falls back
    to bracketed root finding if Newton does not settle.

    Raises:
        DetectionError: If p is outside (0, 1)
    """
    if not (0.0 < p < 1.0) or math.isnan(p):
        raise DetectionError(f"q_inv domain error: p={p} not in (0, 1)")

    x = float(-special.ndtri(p))
    for _ in range(8):
        density = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        if density == 0.0:
            break
        step = (q_func(x) - p) / density
        x += step
        if abs(step) <= 1e-15 * max(1.0, abs(x)):
            break

    if abs(q_func(x) - p) <= 1e-12 * max(p, 1e-300) or abs(q_func(x) - p) <= 1e-15:
        return x

    logger.debug(f"q_inv Newton did not settle for p={p}, bracketing")
    lo, hi = x - 1.0, x + 1.0
    while q_func(lo) < p:
        lo -= 1.0
    while q_func(hi) > p:
        hi += 1.0
    return float(optimize.brentq(lambda t: q_func(t) - p, lo, hi, xtol=1e-14, rtol=4e-16))


# ----------------------------------------------------------------------------
# MD budget distribution
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class SensingContext:
    """Channel-level sensing context shared by every coalition on the channel"""
    md_budget: float
    population: int
    num_samples: int
    fusion_rule: FusionRule = FusionRule.AND

    def __post_init__(self):
        if not 0.0 < self.md_budget < 1.0:
            raise DetectionError(f"md_budget must lie in (0, 1), got {self.md_budget}")
        if self.population < 1:
            raise DetectionError(f"population must be at least 1, got {self.population}")
        if self.num_samples < 1:
            raise DetectionError(f"num_samples must be at least 1, got {self.num_samples}")


def coalition_md_target(ctx: SensingContext, coalition_size: int) -> float:
    """
    MD target of a bottom-layer coalition: 1 - (1 - md_budget) ** (size / population)

    Raises:
        DetectionError: If the coalition is empty or larger than the channel population
    """
    if not 1 <= coalition_size <= ctx.population:
        raise DetectionError(
            f"coalition size {coalition_size} outside 1..{ctx.population}"
        )
    return float(-math.expm1(coalition_size / ctx.population * math.log1p(-ctx.md_budget)))


def integrated_md(ctx: SensingContext, block_sizes: Sequence[int]) -> float:
    """Channel MD of a bottom-layer partition with the given block sizes"""
    if sum(block_sizes) != ctx.population:
        raise DetectionError(
            f"block sizes {list(block_sizes)} do not cover population {ctx.population}"
        )
    log_detect = sum(math.log1p(-coalition_md_target(ctx, size)) for size in block_sizes)
    return float(-math.expm1(log_detect))


def individual_md(md_coalition: float, coalition_size: int, fusion_rule: FusionRule) -> float:
    """
    Per-member MD that yields the coalition MD under the fusion rule

    AND misses when any member misses; OR misses only when all members miss.
    """
    if not 0.0 < md_coalition < 1.0:
        raise DetectionError(f"coalition MD must lie in (0, 1), got {md_coalition}")
    if coalition_size < 1:
        raise DetectionError("coalition size must be at least 1")
    if fusion_rule is FusionRule.AND:
        return float(-math.expm1(math.log1p(-md_coalition) / coalition_size))
    return float(md_coalition ** (1.0 / coalition_size))


@functools.lru_cache(maxsize=4096)
def detection_threshold(md_coalition: float, coalition_size: int, fusion_rule: FusionRule) -> float:
    """Normalized member threshold Q^-1(1 - member MD)"""
    return q_inv(1.0 - individual_md(md_coalition, coalition_size, fusion_rule))


# ----------------------------------------------------------------------------
# False-alarm probabilities
# ----------------------------------------------------------------------------

def fa_from_threshold(snr: float, num_samples: int, threshold: float) -> float:
    """Q(sqrt(2 snr + 1) * threshold + snr * sqrt(num_samples))"""
    if snr < 0:
        raise DetectionError(f"SNR must be nonnegative, got {snr}")
    return q_func(math.sqrt(2.0 * snr + 1.0) * threshold + snr * math.sqrt(num_samples))


def individual_fa(snr: float, num_samples: int, md_individual: float) -> float:
    """
    False-alarm probability of one energy detector at a fixed MD

    Args:
        snr: PU-to-SU SNR lambda
        num_samples: Number of sensing samples
        md_individual: Per-member MD for the applicable fusion rule

    Returns:
        Individual FA probability
    """
    if not 0.0 < md_individual < 1.0:
        raise DetectionError(f"individual MD must lie in (0, 1), got {md_individual}")
    return fa_from_threshold(snr, num_samples, q_inv(1.0 - md_individual))


def combine_fa(member_fas: Sequence[float], fusion_rule: FusionRule) -> float:
    """Fuse member FA probabilities into the coalition FA"""
    if len(member_fas) == 0:
        raise DetectionError("a coalition needs at least one member")
    fas = np.clip(np.asarray(member_fas, dtype=float), FA_FLOOR, 1.0)
    if fusion_rule is FusionRule.AND:
        if len(fas) > LOG_SPACE_MIN_MEMBERS:
            return float(np.exp(np.sum(np.log(fas))))
        return float(np.prod(fas))
    if np.any(fas >= 1.0):
        return 1.0
    return float(-np.expm1(np.sum(np.log1p(-fas))))


def fa_for_md(
    member_snrs: Sequence[float],
    md_coalition: float,
    num_samples: int,
    fusion_rule: FusionRule,
) -> Tuple[float, List[float], float]:
    """
    Coalition FA for a given coalition MD

    Returns:
        Tuple of (coalition FA, member FAs, member threshold)
    """
    threshold = detection_threshold(md_coalition, len(member_snrs), fusion_rule)
    member_fas = [fa_from_threshold(snr, num_samples, threshold) for snr in member_snrs]
    return combine_fa(member_fas, fusion_rule), member_fas, threshold


@dataclass(frozen=True)
class CoalitionSensing:
    """Sensing performance of one bottom-layer coalition"""
    member_snrs: Tuple[float, ...]
    member_fas: Tuple[float, ...]
    coalition_md: float
    coalition_fa: float
    threshold: float
    fusion_rule: FusionRule


def evaluate_coalition(ctx: SensingContext, member_snrs: Sequence[float]) -> CoalitionSensing:
    """Full sensing record of a coalition whose MD target follows from the context"""
    if len(member_snrs) == 0:
        raise DetectionError("a coalition needs at least one member")
    md = coalition_md_target(ctx, len(member_snrs))
    fa, member_fas, threshold = fa_for_md(member_snrs, md, ctx.num_samples, ctx.fusion_rule)
    return CoalitionSensing(
        member_snrs=tuple(float(s) for s in member_snrs),
        member_fas=tuple(member_fas),
        coalition_md=md,
        coalition_fa=fa,
        threshold=threshold,
        fusion_rule=ctx.fusion_rule,
    )


def coalition_fa(
    ctx: SensingContext,
    member_snrs: Sequence[float],
    coalition_size: int = None,
    fusion_rule: FusionRule = None,
) -> float:
    """
    Coalition FA probability

    Args:
        ctx: Channel sensing context
        member_snrs: PU-to-SU SNRs of the members
        coalition_size: Coalition size, must match the member count when given
        fusion_rule: Overrides the context's rule when given

    Returns:
        Coalition FA probability
    """
    if coalition_size is not None and coalition_size != len(member_snrs):
        raise DetectionError(
            f"coalition size {coalition_size} does not match {len(member_snrs)} member SNRs"
        )
    if len(member_snrs) == 0:
        raise DetectionError("a coalition needs at least one member")
    rule = fusion_rule or ctx.fusion_rule
    md = coalition_md_target(ctx, len(member_snrs))
    fa, _, _ = fa_for_md(member_snrs, md, ctx.num_samples, rule)
    return fa


# ----------------------------------------------------------------------------
# Per-SU entries used by the game
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class MemberSensing:
    """
    FA entries of one SU on one channel

    single_fa: FA of the SU sensing as a coalition of one
    grand_fa: the SU's individual FA as a member of the grand coalition S
    """
    snr: float
    single_fa: float
    grand_fa: float


def member_sensing(ctx: SensingContext, snr: float) -> MemberSensing:
    """
    Compute one SU's FA entries for a channel population

    Each call is one FA computation in the complexity bookkeeping. Under AND
    the member threshold does not depend on the coalition size, so both
    entries coincide.
    """
    _record_fa_computation()
    md_single = coalition_md_target(ctx, 1)
    single = fa_from_threshold(
        snr, ctx.num_samples, detection_threshold(md_single, 1, ctx.fusion_rule)
    )
    if ctx.fusion_rule is FusionRule.AND or ctx.population == 1:
        return MemberSensing(snr=snr, single_fa=single, grand_fa=single)
    grand = fa_from_threshold(
        snr, ctx.num_samples,
        detection_threshold(ctx.md_budget, ctx.population, ctx.fusion_rule),
    )
    return MemberSensing(snr=snr, single_fa=single, grand_fa=grand)


# ----------------------------------------------------------------------------
# Two-member heterogeneity study
# ----------------------------------------------------------------------------

def quasiconcavity_conditions(
    ctx: SensingContext,
    coalition_size: int,
    snrs: Sequence[float],
    md_coalition: float = None,
) -> Tuple[bool, bool]:
    """
    Sufficient conditions for FA quasiconcavity in the SNR split

    Args:
        ctx: Sensing context (supplies num_samples and, by default, the coalition MD)
        coalition_size: Coalition size
        snrs: Member SNRs to test the threshold condition against
        md_coalition: Coalition MD; derived from ctx when omitted

    Returns:
        (md condition, threshold condition)
    """
    if md_coalition is None:
        md_coalition = coalition_md_target(ctx, coalition_size)
    md_ok = md_coalition < 0.5 ** coalition_size
    or_threshold = detection_threshold(md_coalition, coalition_size, FusionRule.OR)
    root_nu = math.sqrt(ctx.num_samples)
    threshold_ok = all(
        or_threshold > -root_nu * (2.0 * snr + 1.0) ** 1.5 / (3.0 * snr + 2.0)
        for snr in snrs
    )
    return md_ok, threshold_ok


@dataclass(frozen=True)
class SplitPoint:
    snr_1: float
    snr_2: float
    fa_and: float
    fa_or: float


def fa_split_sweep(
    mean_snr: float,
    md_coalition: float,
    num_samples: int,
    points: int = 101,
) -> List[SplitPoint]:
    """
    AND/OR FA of a two-member coalition over SNR splits with a fixed mean

    The first member's SNR runs evenly from 0 to 2 * mean_snr.
    """
    if points < 2:
        raise DetectionError("a split sweep needs at least two points")
    rows = []
    for snr_1 in np.linspace(0.0, 2.0 * mean_snr, points):
        snr_2 = max(0.0, 2.0 * mean_snr - float(snr_1))
        snrs = (float(snr_1), snr_2)
        fa_and, _, _ = fa_for_md(snrs, md_coalition, num_samples, FusionRule.AND)
        fa_or, _, _ = fa_for_md(snrs, md_coalition, num_samples, FusionRule.OR)
        rows.append(SplitPoint(snr_1=snrs[0], snr_2=snr_2, fa_and=fa_and, fa_or=fa_or))
    return rows
