"""Rankings and comparative statistics for solved allocations.

A ranking orders riders by allocated value (ties broken by rider id) and is
cut into quartiles by rank.  Two allocations over the same riders can be
compared segment by segment: correlations of the value series and of the
rank numbers, quartile-to-quartile movement, and per-rider shifts.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.stats import t as _student_t

from .model import RiderId, TeamId
from .solver import Allocation, Config

SEGMENTS = ("full", "first_half", "second_half", "q1", "q2", "q3", "q4")
DEFAULT_SIGNIFICANCE = 0.05


class AnalysisError(Exception):
    pass


class DegenerateSeries(AnalysisError):
    pass


class RiderSetMismatch(AnalysisError):
    pass


class EmptyAllocation(AnalysisError):
    pass


@dataclass(frozen=True)
class RankEntry:
    rank: int
    rider: RiderId
    team: TeamId
    value: float


@dataclass(frozen=True)
class Ranking:
    config: Config
    entries: tuple[RankEntry, ...]

    @property
    def label(self) -> str:
        return self.config.label()

    @cached_property
    def position(self) -> dict[RiderId, int]:
        return {entry.rider: entry.rank for entry in self.entries}

    @cached_property
    def quartile(self) -> dict[RiderId, int]:
        bounds = quartile_bounds(len(self.entries))
        out: dict[RiderId, int] = {}
        for entry in self.entries:
            for q, bound in enumerate(bounds, start=1):
                if entry.rank <= bound:
                    out[entry.rider] = q
                    break
        return out

    def riders(self) -> tuple[RiderId, ...]:
        return tuple(entry.rider for entry in self.entries)


def quartile_bounds(n: int) -> tuple[int, int, int, int]:
    """Largest rank in each quartile, ceiling splits: quartile k covers
    ranks in (ceil((k-1)n/4), ceil(kn/4)], so the top quartiles take the
    extra riders when n is not divisible by four."""
    if n < 1:
        raise EmptyAllocation("cannot cut an empty ranking into quartiles")
    b1, b2, b3, b4 = ((k * n + 3) // 4 for k in range(1, 5))
    return b1, b2, b3, b4


def rank(allocation: Allocation) -> Ranking:
    """Order riders by value, highest first; equal values sort by rider id.

    Ranks are dense 1..N; tied values still receive distinct ranks through
    the id tie-break, the tie structure stays visible in the values.
    """
    if not allocation.values:
        raise EmptyAllocation("allocation has no riders")
    ordered = sorted(allocation.values.items(), key=lambda kv: (-kv[1], kv[0]))
    entries = tuple(
        RankEntry(rank=i, rider=rider, team=allocation.teams[rider], value=value)
        for i, (rider, value) in enumerate(ordered, start=1)
    )
    return Ranking(config=allocation.config, entries=entries)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Product-moment correlation of two equal-length series."""
    if len(xs) != len(ys):
        raise AnalysisError(f"series lengths differ: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 2:
        raise DegenerateSeries(f"need at least two points, got {n}")
    # Constancy must be checked exactly, before the moments: roundoff in the
    # mean can leave a tiny nonzero variance and the ratio is then pure noise.
    if all(x == xs[0] for x in xs) or all(y == ys[0] for y in ys):
        raise DegenerateSeries("constant series has no defined correlation")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    syy = math.fsum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateSeries("constant series has no defined correlation")
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / math.sqrt(sxx * syy)


def _concordance(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """(C - D, pairs untied in x, pairs untied in y) over all i < j pairs."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    n = len(x)
    iu = np.triu_indices(n, k=1)
    dx = np.sign(x[:, None] - x[None, :])[iu]
    dy = np.sign(y[:, None] - y[None, :])[iu]
    s = float(np.sum(dx * dy))
    n0 = n * (n - 1) / 2.0
    n1 = sum(c * (c - 1) / 2.0 for c in Counter(xs).values())
    n2 = sum(c * (c - 1) / 2.0 for c in Counter(ys).values())
    return s, n0 - n1, n0 - n2


def kendall_tau_b(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Rank agreement (C - D) / sqrt((n0 - n1)(n0 - n2)), tie-corrected in
    both series."""
    if len(xs) != len(ys):
        raise AnalysisError(f"series lengths differ: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise DegenerateSeries(f"need at least two points, got {len(xs)}")
    s, ux, uy = _concordance(xs, ys)
    if ux == 0.0 or uy == 0.0:
        raise DegenerateSeries("constant series has no defined rank correlation")
    return s / math.sqrt(ux * uy)


def _pearson_p_value(r: float, n: int) -> float:
    # Two-sided test of zero correlation via the t distribution.
    if n < 3:
        return 1.0
    if r * r >= 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return 2.0 * float(_student_t.sf(abs(t), n - 2))


def _kendall_p_value(s: float, n: int) -> float:
    # Two-sided normal approximation, ties ignored in the variance.
    if n < 3:
        return 1.0
    z = 3.0 * s / math.sqrt(n * (n - 1) * (2 * n + 5) / 2.0)
    return math.erfc(abs(z) / math.sqrt(2.0))


@dataclass(frozen=True)
class CorrelationBlock:
    """Pearson and tie-corrected Kendall statistics over one series pair.

    ``degenerate`` marks a constant series; the coefficients are then null
    and the significance flags stay down, nothing raises.
    """

    pearson_r: float | None
    pearson_p: float | None
    pearson_significant: bool
    kendall_tau: float | None
    kendall_p: float | None
    kendall_significant: bool
    degenerate: bool

    def to_dict(self) -> dict:
        return {
            "pearson_r": self.pearson_r,
            "pearson_p": self.pearson_p,
            "pearson_significant": self.pearson_significant,
            "kendall_tau": self.kendall_tau,
            "kendall_p": self.kendall_p,
            "kendall_significant": self.kendall_significant,
            "degenerate": self.degenerate,
        }


def _correlation_block(xs: Sequence[float], ys: Sequence[float],
                       significance: float) -> CorrelationBlock:
    try:
        r = pearson(xs, ys)
        s, ux, uy = _concordance(xs, ys)
        if ux == 0.0 or uy == 0.0:
            raise DegenerateSeries("constant series")
        tau = s / math.sqrt(ux * uy)
    except DegenerateSeries:
        return CorrelationBlock(None, None, False, None, None, False, True)
    p_r = _pearson_p_value(r, len(xs))
    p_tau = _kendall_p_value(s, len(xs))
    return CorrelationBlock(
        pearson_r=r,
        pearson_p=p_r,
        pearson_significant=p_r < significance,
        kendall_tau=tau,
        kendall_p=p_tau,
        kendall_significant=p_tau < significance,
        degenerate=False,
    )


@dataclass(frozen=True)
class SegmentStats:
    """Statistics over one baseline-ranking segment, in two blocks: the
    allocated values and the rank numbers."""

    segment: str
    size: int
    points: CorrelationBlock
    ranks: CorrelationBlock

    def to_dict(self) -> dict:
        return {
            "segment": self.segment,
            "size": self.size,
            "points": self.points.to_dict(),
            "ranks": self.ranks.to_dict(),
        }


@dataclass(frozen=True)
class RiderShift:
    rider: RiderId
    team: TeamId
    baseline_rank: int
    other_rank: int
    rank_change: int
    baseline_value: float
    other_value: float
    value_change: float

    def to_dict(self) -> dict:
        return {
            "rider": self.rider,
            "team": self.team,
            "baseline_rank": self.baseline_rank,
            "other_rank": self.other_rank,
            "rank_change": self.rank_change,
            "baseline_value": self.baseline_value,
            "other_value": self.other_value,
            "value_change": self.value_change,
        }


@dataclass(frozen=True)
class ComparisonReport:
    baseline: Config
    against: Config
    rider_count: int
    segments: tuple[SegmentStats, ...]
    transition_percent: tuple[tuple[float, ...], ...]
    shifts: tuple[RiderShift, ...]

    def to_dict(self) -> dict:
        return {
            "baseline": _config_dict(self.baseline),
            "against": _config_dict(self.against),
            "rider_count": self.rider_count,
            "segments": [s.to_dict() for s in self.segments],
            "transition_percent": [list(row) for row in self.transition_percent],
            "shifts": [s.to_dict() for s in self.shifts],
        }


def _config_dict(config: Config) -> dict:
    return {"label": config.label(), "alpha": config.alpha, "beta": config.beta}


def transition_matrix(baseline: Ranking, other: Ranking) -> tuple[tuple[float, ...], ...]:
    """Row-normalised percentages of riders moving from baseline quartile
    (row) to other quartile (column).  An empty row keeps 100 on the
    diagonal so every row still sums to 100."""
    if set(baseline.position) != set(other.position):
        raise RiderSetMismatch("rankings cover different riders")
    counts = [[0] * 4 for _ in range(4)]
    for rider, q_from in baseline.quartile.items():
        counts[q_from - 1][other.quartile[rider] - 1] += 1
    rows = []
    for i, row in enumerate(counts):
        total = sum(row)
        if total == 0:
            rows.append(tuple(100.0 if j == i else 0.0 for j in range(4)))
        else:
            rows.append(tuple(100.0 * c / total for c in row))
    return tuple(rows)


def _segment_members(baseline: Ranking) -> dict[str, list[RiderId]]:
    n = len(baseline.entries)
    half = (n + 1) // 2
    members: dict[str, list[RiderId]] = {name: [] for name in SEGMENTS}
    for entry in baseline.entries:
        members["full"].append(entry.rider)
        members["first_half" if entry.rank <= half else "second_half"].append(entry.rider)
        members[f"q{baseline.quartile[entry.rider]}"].append(entry.rider)
    return members


def compare(baseline: Allocation, other: Allocation,
            significance: float = DEFAULT_SIGNIFICANCE) -> ComparisonReport:
    """Contrast two allocations over the same riders.

    Segments (halves and quartiles, plus the full field) come from the
    baseline ranking.  A segment where either series is constant carries a
    null block with the ``degenerate`` flag instead of failing the report.
    Shifts are reported as other minus baseline, sorted by baseline rank.
    """
    if not baseline.values or not other.values:
        raise EmptyAllocation("cannot compare empty allocations")
    if set(baseline.values) != set(other.values):
        raise RiderSetMismatch("allocations cover different riders")

    rank_base = rank(baseline)
    rank_other = rank(other)
    members = _segment_members(rank_base)

    segments = []
    for name in SEGMENTS:
        riders = members[name]
        values_block = _correlation_block(
            [baseline.values[r] for r in riders],
            [other.values[r] for r in riders],
            significance,
        )
        ranks_block = _correlation_block(
            [float(rank_base.position[r]) for r in riders],
            [float(rank_other.position[r]) for r in riders],
            significance,
        )
        segments.append(SegmentStats(name, len(riders), values_block, ranks_block))

    shifts = tuple(
        RiderShift(
            rider=entry.rider,
            team=entry.team,
            baseline_rank=entry.rank,
            other_rank=rank_other.position[entry.rider],
            rank_change=rank_other.position[entry.rider] - entry.rank,
            baseline_value=entry.value,
            other_value=other.values[entry.rider],
            value_change=other.values[entry.rider] - entry.value,
        )
        for entry in rank_base.entries
    )
    return ComparisonReport(
        baseline=baseline.config,
        against=other.config,
        rider_count=len(rank_base.entries),
        segments=tuple(segments),
        transition_percent=transition_matrix(rank_base, rank_other),
        shifts=shifts,
    )
