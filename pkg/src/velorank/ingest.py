"""CSV ingestion: parse season data files, apply transfer directives, validate.

Expected layout of a data directory::

    teams.csv       team_id, name, category          (category WT or PT)
    riders.csv      rider_id, name, team_id          (one row per team spell)
    results.csv     race_id, race_name, category, team_id, rider_id, points, days
    directives.csv  rider_id, rule, param1, param2, note   (optional)

All files are UTF-8, comma-separated, RFC-4180 quoting, header row required.
``results.csv`` may carry an optional ``date`` column (ISO yyyy-mm-dd) which
the ``restrict_after_date`` directive needs; without it that rule keeps all
rows and emits a warning.

Mid-season transfers are resolved by directives, one per rider:

* ``exclude_rider``        drop the rider entirely (trainees, stagiaires)
* ``restrict_after_date``  keep only results dated on/after param1 (promotions)
* ``exclude_races``        drop the rider's rows for the races in param1,
                           separated by ``;`` (national-team appearances)
* ``keep_team``            keep only the rows for param1, or for the team
                           with the most race days when param1 is empty
                           (transfers between two sampled teams)
"""

from __future__ import annotations

import csv
import datetime as _dt
from dataclasses import dataclass
from pathlib import Path

from .model import RaceResult, RiderId, Season, SeasonTotals, TeamId, season_totals

RESULT_COLUMNS = ("race_id", "race_name", "category", "team_id", "rider_id", "points", "days")
TEAM_COLUMNS = ("team_id", "name", "category")
RIDER_COLUMNS = ("rider_id", "name", "team_id")
DIRECTIVE_COLUMNS = ("rider_id", "rule", "param1", "param2", "note")

DIRECTIVE_RULES = ("exclude_rider", "restrict_after_date", "exclude_races", "keep_team")


class IngestError(Exception):
    """Base class for season-file ingestion failures."""


class MissingFile(IngestError):
    pass


class MalformedRow(IngestError):
    def __init__(self, path, line: int, reason: str):
        self.path = str(path)
        self.line = line
        self.reason = reason
        super().__init__(f"{self.path}:{line}: {reason}")


class DuplicateResult(IngestError):
    def __init__(self, race: str, rider: str):
        self.race = race
        self.rider = rider
        super().__init__(f"duplicate result for rider {rider!r} in race {race!r}")


class UnknownTeam(IngestError):
    pass


class UnknownRider(IngestError):
    pass


class ConflictingDirective(IngestError):
    pass


class InvalidSeason(IngestError):
    """Raised when the cleaned season still violates a model invariant."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


@dataclass(frozen=True)
class TransferDirective:
    rider: RiderId
    rule: str
    param1: str = ""
    param2: str = ""
    note: str = ""


@dataclass(frozen=True)
class IngestReport:
    """Counts and totals describing one ingestion run."""

    riders_loaded: int
    races_loaded: int
    results_loaded: int
    directives_applied: int
    dropped_results: int
    totals: SeasonTotals
    warnings: tuple[str, ...] = ()


def _open_rows(path: Path, expected: tuple[str, ...], warnings: list[str]):
    if not path.is_file():
        raise MissingFile(f"missing input file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise MalformedRow(path, 1, "empty file, header row required")
        missing = [c for c in expected if c not in header]
        if missing:
            raise MalformedRow(path, 1, f"missing columns: {', '.join(missing)}")
        extra = [c for c in header if c not in expected and c != "date"]
        if extra:
            warnings.append(f"{path.name}: ignoring unknown columns {', '.join(extra)}")
        yield from ((reader.line_num, row) for row in reader)


def _parse_number(path: Path, line: int, column: str, raw: str) -> float:
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise MalformedRow(path, line, f"{column} is not a number: {raw!r}") from None
    if value < 0:
        raise MalformedRow(path, line, f"{column} must be non-negative, got {raw}")
    return value


def _parse_date(path: Path, line: int, raw: str) -> _dt.date:
    try:
        return _dt.date.fromisoformat(raw)
    except ValueError:
        raise MalformedRow(path, line, f"bad ISO date: {raw!r}") from None


def _load_teams(path: Path, warnings: list[str]) -> dict[TeamId, tuple[str, str]]:
    teams: dict[TeamId, tuple[str, str]] = {}
    for line, row in _open_rows(path, TEAM_COLUMNS, warnings):
        team_id = (row.get("team_id") or "").strip()
        if not team_id:
            raise MalformedRow(path, line, "empty team_id")
        category = (row.get("category") or "").strip()
        if category not in ("WT", "PT"):
            raise MalformedRow(path, line, f"category must be WT or PT, got {category!r}")
        if team_id in teams:
            raise MalformedRow(path, line, f"team {team_id!r} declared twice")
        teams[team_id] = ((row.get("name") or "").strip(), category)
    return teams


def _load_riders(path: Path, teams, warnings: list[str]) -> dict[RiderId, list[TeamId]]:
    """Rider to team-spell map; a transferred rider appears once per team."""
    spells: dict[RiderId, list[TeamId]] = {}
    for line, row in _open_rows(path, RIDER_COLUMNS, warnings):
        rider_id = (row.get("rider_id") or "").strip()
        team_id = (row.get("team_id") or "").strip()
        if not rider_id:
            raise MalformedRow(path, line, "empty rider_id")
        if team_id not in teams:
            raise UnknownTeam(f"{path.name}:{line}: rider {rider_id!r} references unknown team {team_id!r}")
        entries = spells.setdefault(rider_id, [])
        if team_id in entries:
            raise MalformedRow(path, line, f"rider {rider_id!r} declared twice for team {team_id!r}")
        entries.append(team_id)
    return spells


def _load_results(path: Path, spells, warnings: list[str]):
    rows: list[tuple[RaceResult, _dt.date | None]] = []
    seen: set[tuple[str, str]] = set()
    has_dates = False
    for line, row in _open_rows(path, RESULT_COLUMNS, warnings):
        race_id = (row.get("race_id") or "").strip()
        team_id = (row.get("team_id") or "").strip()
        rider_id = (row.get("rider_id") or "").strip()
        if not race_id:
            raise MalformedRow(path, line, "empty race_id")
        if rider_id not in spells:
            raise UnknownRider(f"{path.name}:{line}: unknown rider {rider_id!r}")
        if team_id not in spells[rider_id]:
            raise UnknownTeam(
                f"{path.name}:{line}: rider {rider_id!r} has no declared spell with team {team_id!r}"
            )
        points = _parse_number(path, line, "points", row.get("points"))
        days = _parse_number(path, line, "days", row.get("days"))
        if points > 0 and days == 0:
            raise MalformedRow(path, line, "points without start (points > 0 requires days > 0)")
        key = (race_id, rider_id)
        if key in seen:
            raise DuplicateResult(race_id, rider_id)
        seen.add(key)
        date = None
        raw_date = (row.get("date") or "").strip()
        if raw_date:
            date = _parse_date(path, line, raw_date)
            has_dates = True
        rows.append((RaceResult(race_id, team_id, rider_id, points, days), date))
    return rows, has_dates


def _load_directives(path: Path, spells, warnings: list[str]) -> list[TransferDirective]:
    directives: list[TransferDirective] = []
    seen: set[RiderId] = set()
    for line, row in _open_rows(path, DIRECTIVE_COLUMNS, warnings):
        rider_id = (row.get("rider_id") or "").strip()
        rule = (row.get("rule") or "").strip()
        if rider_id not in spells:
            raise UnknownRider(f"{path.name}:{line}: directive for unknown rider {rider_id!r}")
        if rule not in DIRECTIVE_RULES:
            raise MalformedRow(path, line, f"unknown rule {rule!r}")
        if rider_id in seen:
            raise ConflictingDirective(f"rider {rider_id!r} has more than one directive")
        seen.add(rider_id)
        directives.append(
            TransferDirective(
                rider=rider_id,
                rule=rule,
                param1=(row.get("param1") or "").strip(),
                param2=(row.get("param2") or "").strip(),
                note=(row.get("note") or "").strip(),
            )
        )
    return directives


def _pick_team(rider: RiderId, rows) -> TeamId:
    """Team the rider raced most days for; ties fall to points, then team id."""
    stats: dict[TeamId, list[float]] = {}
    for result, _ in rows:
        if result.rider == rider:
            entry = stats.setdefault(result.team, [0.0, 0.0])
            entry[0] += result.days
            entry[1] += result.points
    if not stats:
        raise ConflictingDirective(f"keep_team for rider {rider!r} who has no results")
    return sorted(stats, key=lambda t: (-stats[t][0], -stats[t][1], t))[0]


def _apply_directives(rows, has_dates, spells, directives, warnings: list[str]):
    spells = {rider: list(teams) for rider, teams in spells.items()}
    dropped = 0
    for directive in directives:
        rider = directive.rider
        if directive.rule == "exclude_rider":
            kept = [(r, d) for r, d in rows if r.rider != rider]
            dropped += len(rows) - len(kept)
            rows = kept
            spells.pop(rider, None)
        elif directive.rule == "restrict_after_date":
            if not directive.param1:
                raise ConflictingDirective(f"restrict_after_date for {rider!r} needs a date in param1")
            cutoff = _dt.date.fromisoformat(directive.param1)
            if not has_dates:
                warnings.append(
                    f"restrict_after_date for {rider!r}: results carry no date column, keeping all rows"
                )
                continue
            kept = [(r, d) for r, d in rows if r.rider != rider or (d is not None and d >= cutoff)]
            dropped += len(rows) - len(kept)
            rows = kept
        elif directive.rule == "exclude_races":
            races = {p.strip() for p in directive.param1.split(";") if p.strip()}
            if not races:
                raise ConflictingDirective(f"exclude_races for {rider!r} lists no races")
            kept = [(r, d) for r, d in rows if r.rider != rider or r.race not in races]
            dropped += len(rows) - len(kept)
            rows = kept
        elif directive.rule == "keep_team":
            team = directive.param1 or _pick_team(rider, rows)
            if rider in spells and team not in spells[rider]:
                raise ConflictingDirective(
                    f"keep_team for {rider!r}: no declared spell with team {team!r}"
                )
            kept = [(r, d) for r, d in rows if r.rider != rider or r.team == team]
            dropped += len(rows) - len(kept)
            rows = kept
            spells[rider] = [team]
    return rows, spells, dropped


def load_season(data_dir, directives=None) -> tuple[Season, IngestReport]:
    """Parse a data directory into a validated :class:`Season` plus a report.

    ``directives`` may name a directives CSV; ``None`` means no preprocessing.
    Raises an :class:`IngestError` subclass on malformed input and
    :class:`InvalidSeason` when the cleaned data still breaks an invariant.
    """
    data_dir = Path(data_dir)
    warnings: list[str] = []

    teams = _load_teams(data_dir / "teams.csv", warnings)
    spells = _load_riders(data_dir / "riders.csv", teams, warnings)
    rows, has_dates = _load_results(data_dir / "results.csv", spells, warnings)

    riders_loaded = len(spells)
    races_loaded = len({r.race for r, _ in rows})
    results_loaded = len(rows)

    applied = []
    if directives is not None:
        applied = _load_directives(Path(directives), spells, warnings)
    rows, spells, dropped = _apply_directives(rows, has_dates, spells, applied, warnings)

    rosters = {team: set() for team in teams}
    for rider, rider_teams in spells.items():
        for team in rider_teams:
            rosters[team].add(rider)

    season = Season.build((r for r, _ in rows), rosters=rosters)
    violations = validate(season)
    if violations:
        raise InvalidSeason(violations)

    report = IngestReport(
        riders_loaded=riders_loaded,
        races_loaded=races_loaded,
        results_loaded=results_loaded,
        directives_applied=len(applied),
        dropped_results=dropped,
        totals=season_totals(season),
        warnings=tuple(warnings),
    )
    return season, report


def validate(season: Season) -> list[str]:
    """Check the season invariants; returns one message per violation."""
    violations: list[str] = []

    memberships: dict[RiderId, list[TeamId]] = {}
    for team in season.teams:
        if not team:
            violations.append("team with empty id")
        for rider in season.rosters[team]:
            if not rider:
                violations.append(f"team {team!r}: rider with empty id")
            memberships.setdefault(rider, []).append(team)
    for rider, teams in sorted(memberships.items()):
        if len(teams) > 1:
            violations.append(f"rider {rider!r}: in rosters of {', '.join(sorted(teams))}")

    seen: set[tuple[str, str]] = set()
    race_set = set(season.races)
    for row in season.results:
        key = (row.race, row.rider)
        if key in seen:
            violations.append(f"rider {row.rider!r}: duplicate result in race {row.race!r}")
        seen.add(key)
        if row.race not in race_set:
            violations.append(f"race {row.race!r}: result references unlisted race")
        if row.team not in season.rosters:
            violations.append(f"result {row.race!r}/{row.rider!r}: unknown team {row.team!r}")
        elif row.rider not in season.rosters[row.team]:
            violations.append(
                f"result {row.race!r}/{row.rider!r}: rider not on roster of {row.team!r}"
            )
        if row.points < 0:
            violations.append(f"result {row.race!r}/{row.rider!r}: negative points")
        if row.days < 0:
            violations.append(f"result {row.race!r}/{row.rider!r}: negative days")
        if row.points > 0 and row.days == 0:
            violations.append(f"result {row.race!r}/{row.rider!r}: points without start")
    return violations
