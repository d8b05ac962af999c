"""Shared fixtures: the three-rider worked season and a CSV copy of it."""

from __future__ import annotations

import pytest

from velorank.model import RaceResult, Season

# One team, four races, all participation days equal to 1.  Season totals:
# rider1 550, rider2 2150, rider3 1500, team 4200.
WORKED_ROWS = (
    RaceResult("raceA", "tm", "r1", 50.0, 1.0),
    RaceResult("raceA", "tm", "r2", 950.0, 1.0),
    RaceResult("raceB", "tm", "r1", 100.0, 1.0),
    RaceResult("raceB", "tm", "r3", 900.0, 1.0),
    RaceResult("raceC", "tm", "r1", 200.0, 1.0),
    RaceResult("raceD", "tm", "r1", 200.0, 1.0),
    RaceResult("raceD", "tm", "r2", 1200.0, 1.0),
    RaceResult("raceD", "tm", "r3", 600.0, 1.0),
)

RAW_POINTS = {"r1": 550.0, "r2": 2150.0, "r3": 1500.0}
TEAM_TOTAL = 4200.0

# Participation corner (alpha=1, beta=0): each race's points split equally
# over its starters: r1 gets 1000/2 + 1000/2 + 200 + 2000/3.
PART_VALUES = {
    "r1": 500.0 + 500.0 + 200.0 + 2000.0 / 3.0,
    "r2": 500.0 + 2000.0 / 3.0,
    "r3": 500.0 + 2000.0 / 3.0,
}

# Weighted fixed point at (alpha, beta) = (0.1, 1), frozen from an
# independent damped-iteration run at tolerance 1e-12.
WEIGHTED_01_VALUES = {
    "r1": 286.55140428714094,
    "r2": 2488.2897703963063,
    "r3": 1425.1588253165528,
}

# Unweighted co-scoring at alpha = 0.1: rider 1's share of the team total.
UNWEIGHTED_01_SHARE = 83.5611320217185


@pytest.fixture()
def worked_season() -> Season:
    return Season.build(list(WORKED_ROWS))


@pytest.fixture()
def worked_data_dir(tmp_path):
    """The worked season in the ingest CSV layout."""
    d = tmp_path / "season"
    d.mkdir()
    (d / "teams.csv").write_text(
        "team_id,name,category\ntm,Example Team,WT\n", encoding="utf-8")
    (d / "riders.csv").write_text(
        "rider_id,name,team_id\n"
        "r1,Rider One,tm\nr2,Rider Two,tm\nr3,Rider Three,tm\n", encoding="utf-8")
    lines = ["race_id,race_name,category,team_id,rider_id,points,days"]
    for row in WORKED_ROWS:
        lines.append(f"{row.race},{row.race},WT,{row.team},{row.rider},"
                     f"{row.points:g},{row.days:g}")
    (d / "results.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return d
