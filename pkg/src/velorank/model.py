"""Season data model and the deterministic aggregations built on top of it.

A season is the triple (teams with rosters, races, per-race results).  Each
result row records one rider's points and days started in one race; every
quantity the allocation formula needs (team race totals, race weights, season
totals) is derived from those rows by the pure functions below.

All containers are immutable after construction and every aggregation walks
the data in canonical (team id, race id, rider id) order, so repeated calls
produce identical results bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

RiderId = str
TeamId = str
RaceId = str


@dataclass(frozen=True)
class RaceResult:
    """One rider's outcome in one race: UCI points scored and days started."""

    race: RaceId
    team: TeamId
    rider: RiderId
    points: float
    days: float


@dataclass(frozen=True)
class Season:
    """A full season: team rosters, the race calendar, and all result rows.

    ``rosters`` maps each team to its riders (sorted); riders with a roster
    entry but no results are legitimate and simply score zero.  Construction
    via :meth:`build` canonicalises ordering; invariants (unique rider-team
    membership, at most one result per (race, rider)) are checked by
    ``ingest.validate``, not here.
    """

    rosters: Mapping[TeamId, tuple[RiderId, ...]]
    races: tuple[RaceId, ...]
    results: tuple[RaceResult, ...]

    @classmethod
    def build(
        cls,
        results: Iterable[RaceResult],
        rosters: Mapping[TeamId, Iterable[RiderId]] | None = None,
    ) -> "Season":
        """Create a season in canonical order, deriving rosters and the race
        list from the result rows where they are not given explicitly."""
        rows = list(results)
        derived: dict[TeamId, set[RiderId]] = {}
        if rosters is not None:
            for team, riders in rosters.items():
                derived.setdefault(team, set()).update(riders)
        for row in rows:
            derived.setdefault(row.team, set()).add(row.rider)
        canonical_rosters = {
            team: tuple(sorted(derived[team])) for team in sorted(derived)
        }
        races = tuple(sorted({row.race for row in rows}))
        rows.sort(key=lambda r: (r.team, r.race, r.rider))
        return cls(rosters=canonical_rosters, races=races, results=tuple(rows))

    @cached_property
    def teams(self) -> tuple[TeamId, ...]:
        return tuple(sorted(self.rosters))

    @cached_property
    def riders(self) -> tuple[RiderId, ...]:
        return tuple(r for team in self.teams for r in self.rosters[team])

    @cached_property
    def team_of(self) -> dict[RiderId, TeamId]:
        """Rider to team lookup.  On an invalid season where a rider sits in
        two rosters, the lexicographically last team wins; ``validate`` is the
        place that reports such seasons."""
        out: dict[RiderId, TeamId] = {}
        for team in self.teams:
            for rider in self.rosters[team]:
                out[rider] = team
        return out

    @cached_property
    def results_by_team(self) -> dict[TeamId, tuple[RaceResult, ...]]:
        grouped: dict[TeamId, list[RaceResult]] = {team: [] for team in self.teams}
        for row in self.results:
            grouped.setdefault(row.team, []).append(row)
        return {team: tuple(rows) for team, rows in grouped.items()}


@dataclass(frozen=True)
class RaceTeamAggregate:
    """Totals and per-rider weights for one team in one race.

    ``weights`` covers every rider with a result row in the race.  When the
    team scored no points the weights are all zero by convention: the race
    then contributes nothing to any allocation term, so the convention is
    observationally neutral while keeping the aggregate total.
    """

    race: RaceId
    team: TeamId
    team_points: float
    team_days: float
    weights: Mapping[RiderId, float]


@dataclass(frozen=True)
class SeasonTotals:
    """Season-wide sums: per-rider points, per-team points, and counts."""

    per_rider_points: Mapping[RiderId, float]
    per_team_points: Mapping[TeamId, float]
    grand_total: float
    rider_count: int
    race_count: int
    total_days: float


def aggregate(season: Season) -> dict[tuple[RaceId, TeamId], RaceTeamAggregate]:
    """Compute one :class:`RaceTeamAggregate` per (race, team) pair that has
    at least one result row."""
    grouped: dict[tuple[RaceId, TeamId], list[RaceResult]] = {}
    for row in season.results:
        grouped.setdefault((row.race, row.team), []).append(row)

    out: dict[tuple[RaceId, TeamId], RaceTeamAggregate] = {}
    for key in sorted(grouped):
        rows = sorted(grouped[key], key=lambda r: r.rider)
        team_points = 0.0
        team_days = 0.0
        for row in rows:
            team_points += row.points
            team_days += row.days
        if team_points > 0.0:
            weights = {row.rider: row.points / team_points for row in rows}
        else:
            weights = {row.rider: 0.0 for row in rows}
        out[key] = RaceTeamAggregate(
            race=key[0],
            team=key[1],
            team_points=team_points,
            team_days=team_days,
            weights=weights,
        )
    return out


def season_totals(season: Season) -> SeasonTotals:
    """Season totals; the grand total equals the sum over all result rows."""
    per_rider = {rider: 0.0 for rider in season.riders}
    per_team = {team: 0.0 for team in season.teams}
    total_days = 0.0
    for team in season.teams:
        for row in season.results_by_team[team]:
            per_rider[row.rider] = per_rider.get(row.rider, 0.0) + row.points
            per_team[team] += row.points
            total_days += row.days
    grand_total = 0.0
    for team in season.teams:
        grand_total += per_team[team]
    return SeasonTotals(
        per_rider_points=per_rider,
        per_team_points=per_team,
        grand_total=grand_total,
        rider_count=len(season.riders),
        race_count=len(season.races),
        total_days=total_days,
    )
