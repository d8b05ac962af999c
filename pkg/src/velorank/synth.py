"""Deterministic synthetic seasons with a leader/domestique split.

Testing plumbing, not simulation: leaders draw large point totals,
domestiques small or none, everyone who starts has at least one day.  The
generator carries its own explicit-state PRNG so a seed reproduces the same
season on any platform or implementation, independent of the host's random
module.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .model import RaceResult, Season
from .solver import InvalidConfig

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """64-bit SplitMix generator; tiny, portable, explicit state."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        # 53 random bits, the full double mantissa.
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def below(self, n: int) -> int:
        """Integer in [0, n); modulo bias is irrelevant at test scale."""
        return self.next_u64() % n


@dataclass(frozen=True)
class SynthSpec:
    teams: int = 4
    riders_per_team: int = 6
    races: int = 10
    leader_fraction: float = 0.25
    points_scale: float = 100.0
    seed: int = 0

    def __post_init__(self):
        if self.teams < 1 or self.riders_per_team < 1 or self.races < 1:
            raise InvalidConfig("synthetic season needs at least 1 team, rider and race")
        if not 0.0 < self.leader_fraction <= 1.0:
            raise InvalidConfig(f"leader_fraction {self.leader_fraction} outside (0, 1]")
        if not self.points_scale > 0.0:
            raise InvalidConfig(f"points_scale must be positive, got {self.points_scale}")


def _leader_count(spec: SynthSpec) -> int:
    # At least one leader per team; fraction 1.0 makes everyone a leader.
    count = int(spec.leader_fraction * spec.riders_per_team + 0.999999)
    return max(1, min(count, spec.riders_per_team))


def generate(spec: SynthSpec) -> Season:
    """Build a season as a pure function of the spec.

    Draw order is fixed: teams outer, races inner, riders in roster order;
    per rider one start draw, then days, then the scoring draws.  The first
    ``leader_fraction`` of each roster are the leaders.
    """
    rng = SplitMix64(spec.seed)
    leaders = _leader_count(spec)

    rosters: dict[str, tuple[str, ...]] = {}
    for t in range(1, spec.teams + 1):
        team = f"team{t:02d}"
        rosters[team] = tuple(
            f"rider{t:02d}{i:02d}" for i in range(1, spec.riders_per_team + 1)
        )

    results: list[RaceResult] = []
    for t in range(1, spec.teams + 1):
        team = f"team{t:02d}"
        roster = rosters[team]
        for r in range(1, spec.races + 1):
            race = f"race{r:03d}"
            starters = [rider for rider in roster if rng.uniform() < 0.8]
            if not starters:
                starters = [roster[rng.below(len(roster))]]
            started = set(starters)
            for i, rider in enumerate(roster):
                if rider not in started:
                    continue
                days = 1 + rng.below(3)
                is_leader = i < leaders
                if is_leader:
                    points = spec.points_scale * (0.5 + rng.uniform()) if rng.uniform() < 0.8 else 0.0
                else:
                    points = spec.points_scale * 0.15 * rng.uniform() if rng.uniform() < 0.3 else 0.0
                results.append(RaceResult(
                    race=race, team=team, rider=rider,
                    points=round(points, 2), days=float(days),
                ))
    return Season.build(results, rosters=rosters)


def write_season_csv(season: Season, data_dir: str | Path) -> list[Path]:
    """Emit the season in the ingest CSV layout; returns the files written.

    Rows are written in canonical season order with fixed formatting, so
    the same season always produces byte-identical files.
    """
    directory = Path(data_dir)
    directory.mkdir(parents=True, exist_ok=True)

    def fmt(x: float) -> str:
        # Shortest exact representation so re-ingesting reproduces the
        # season bit for bit.
        return str(int(x)) if x == int(x) else repr(x)

    teams_path = directory / "teams.csv"
    lines = ["team_id,name,category"]
    for team in season.teams:
        lines.append(f"{team},{team.capitalize()} Cycling,WT")
    teams_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    riders_path = directory / "riders.csv"
    lines = ["rider_id,name,team_id"]
    for team in season.teams:
        for rider in season.rosters[team]:
            lines.append(f"{rider},Rider {rider},{team}")
    riders_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    results_path = directory / "results.csv"
    lines = ["race_id,race_name,category,team_id,rider_id,points,days"]
    for row in season.results:
        lines.append(
            f"{row.race},{row.race.capitalize()},WT,{row.team},{row.rider},"
            f"{fmt(row.points)},{fmt(row.days)}"
        )
    results_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return [teams_path, riders_path, results_path]
