import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from velorank.model import RaceResult, Season, season_totals
from velorank.solver import (
    PRESETS,
    Config,
    InvalidConfig,
    NonConvergence,
    component_values,
    oracle_solve,
    preset,
    race_shares,
    solve,
    solve_unweighted,
)
from velorank.synth import SynthSpec, generate

from conftest import (
    PART_VALUES,
    RAW_POINTS,
    TEAM_TOTAL,
    UNWEIGHTED_01_SHARE,
    WEIGHTED_01_VALUES,
)


# --- configuration ---------------------------------------------------------

def test_alpha_zero_rejected():
    with pytest.raises(InvalidConfig, match="alpha"):
        Config(alpha=0.0, beta=0.5)


@pytest.mark.parametrize("alpha,beta", [(-0.1, 0.5), (1.1, 0.5), (0.5, -0.1), (0.5, 1.1)])
def test_out_of_range_parameters_rejected(alpha, beta):
    with pytest.raises(InvalidConfig):
        Config(alpha=alpha, beta=beta)


def test_bad_tolerances_rejected():
    with pytest.raises(InvalidConfig):
        Config(0.5, 0.5, tolerance=0.0)
    with pytest.raises(InvalidConfig):
        Config(0.5, 0.5, max_iterations=0)


def test_presets():
    assert (PRESETS["uci"].alpha, PRESETS["uci"].beta) == (1.0, 1.0)
    assert (PRESETS["part"].alpha, PRESETS["part"].beta) == (1.0, 0.0)
    assert (PRESETS["cosc"].alpha, PRESETS["cosc"].beta) == (0.1, 1.0)
    assert PRESETS["ref"].alpha == pytest.approx(1.0 / 3.0)
    assert PRESETS["ref"].beta == 0.5
    assert [PRESETS[k].name for k in ("uci", "part", "cosc", "ref")] == \
        ["UCI", "PART", "CoSc", "REF"]


def test_preset_lookup_with_overrides():
    cfg = preset("REF", tolerance=1e-12, max_iterations=50)
    assert cfg.name == "REF" and cfg.tolerance == 1e-12 and cfg.max_iterations == 50
    with pytest.raises(InvalidConfig, match="preset"):
        preset("elo")


# --- worked example --------------------------------------------------------

def test_raw_points_corner_is_exact(worked_season):
    alloc = solve(worked_season, PRESETS["uci"])
    assert alloc.values == RAW_POINTS
    assert alloc.iterations_by_team == {"tm": 0}
    assert alloc.residual_by_team == {"tm": 0.0}


def test_participation_corner(worked_season):
    alloc = solve(worked_season, PRESETS["part"])
    for rider, expected in PART_VALUES.items():
        assert alloc.values[rider] == pytest.approx(expected, abs=1e-9)
    # Rider 1 starts everything: 44.44% of the season total.
    assert 100 * alloc.values["r1"] / TEAM_TOTAL == pytest.approx(44.44, abs=0.01)


def test_weighted_fixed_point(worked_season):
    alloc = solve(worked_season, PRESETS["cosc"])
    for rider, expected in WEIGHTED_01_VALUES.items():
        assert alloc.values[rider] == pytest.approx(expected, abs=1e-5)
    assert sum(alloc.values.values()) == pytest.approx(TEAM_TOTAL, abs=1e-6)
    assert alloc.iterations_by_team["tm"] > 0
    assert alloc.residual_by_team["tm"] <= PRESETS["cosc"].tolerance


def test_component_values(worked_season):
    corners = component_values(worked_season)
    assert corners["r1"].uci == RAW_POINTS["r1"]
    assert corners["r1"].participation == pytest.approx(PART_VALUES["r1"], abs=1e-9)
    assert corners["r1"].coscore == pytest.approx(WEIGHTED_01_VALUES["r1"], abs=1e-5)


def test_unweighted_share(worked_season):
    alloc = solve_unweighted(worked_season, Config(alpha=0.1, beta=1.0))
    share = 100 * alloc.values["r1"] / sum(alloc.values.values())
    assert share == pytest.approx(UNWEIGHTED_01_SHARE, abs=1e-6)
    # beta does not enter the unweighted rule.
    again = solve_unweighted(worked_season, Config(alpha=0.1, beta=0.25))
    assert again.values == alloc.values


def test_unweighted_alpha_one_is_participation_corner(worked_season):
    alloc = solve_unweighted(worked_season, Config(alpha=1.0, beta=1.0))
    for rider, expected in PART_VALUES.items():
        assert alloc.values[rider] == pytest.approx(expected, abs=1e-9)


# --- structure -------------------------------------------------------------

def test_null_rider_gets_zero(worked_season):
    season = Season.build(list(worked_season.results),
                          rosters={"tm": ("r1", "r2", "r3", "r4")})
    for cfg in PRESETS.values():
        alloc = solve(season, cfg)
        assert alloc.values["r4"] == 0.0
        assert alloc.teams["r4"] == "tm"


def test_solo_team_rider_keeps_own_points():
    season = Season.build([
        RaceResult("raceA", "solo", "only", 120.0, 1.0),
        RaceResult("raceB", "solo", "only", 80.0, 2.0),
    ])
    for cfg in (PRESETS["uci"], PRESETS["part"], PRESETS["cosc"], PRESETS["ref"]):
        alloc = solve(season, cfg)
        assert alloc.values["only"] == pytest.approx(200.0, abs=1e-8)


def test_zero_point_race_contributes_nothing(worked_season):
    rows = list(worked_season.results) + [
        RaceResult("raceZ", "tm", "r1", 0.0, 3.0),
        RaceResult("raceZ", "tm", "r2", 0.0, 3.0),
    ]
    season = Season.build(rows)
    base = solve(worked_season, PRESETS["cosc"])
    padded = solve(season, PRESETS["cosc"])
    for rider in base.values:
        assert padded.values[rider] == base.values[rider]


def test_teams_are_independent(worked_season):
    rows = list(worked_season.results) + [
        RaceResult("raceA", "other", "x1", 500.0, 1.0),
        RaceResult("raceA", "other", "x2", 100.0, 2.0),
    ]
    both = solve(Season.build(rows), PRESETS["cosc"])
    alone = solve(worked_season, PRESETS["cosc"])
    for rider in alone.values:
        assert both.values[rider] == alone.values[rider]


def test_identical_teammates_get_identical_values():
    rows = [
        RaceResult("raceA", "tm", "a", 100.0, 1.0),
        RaceResult("raceA", "tm", "b", 100.0, 1.0),
        RaceResult("raceA", "tm", "c", 400.0, 1.0),
        RaceResult("raceB", "tm", "a", 50.0, 2.0),
        RaceResult("raceB", "tm", "b", 50.0, 2.0),
    ]
    season = Season.build(rows)
    for alpha, beta in ((0.2, 0.7), (0.5, 0.0), (1.0, 1.0)):
        alloc = solve(season, Config(alpha, beta))
        assert alloc.values["a"] == alloc.values["b"]


def test_non_convergence_raises(worked_season):
    with pytest.raises(NonConvergence) as err:
        solve(worked_season, Config(0.1, 1.0, max_iterations=1))
    assert err.value.team == "tm"
    assert err.value.iterations == 1


def test_warm_start_agrees_with_cold_start(worked_season):
    cold = solve(worked_season, PRESETS["cosc"])
    warm = solve(worked_season, PRESETS["cosc"], initial=cold.values)
    for rider in cold.values:
        assert warm.values[rider] == pytest.approx(cold.values[rider], abs=1e-6)


def test_race_shares_scale_invariant():
    coefs = [1.0, 2.0, 0.5]
    xs = [10.0, 3.0, 7.0]
    shares = race_shares(coefs, xs)
    scaled = race_shares(coefs, [x * 137.0 for x in xs])
    assert shares == pytest.approx(scaled, abs=1e-15)
    assert sum(shares) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ZeroDivisionError):
        race_shares([1.0, 1.0], [0.0, 0.0])


def test_oracle_matches_solver(worked_season):
    for cfg in (Config(0.1, 1.0, tolerance=1e-13), Config(0.5, 0.3, tolerance=1e-13)):
        fast = solve(worked_season, cfg)
        slow = oracle_solve(worked_season, cfg)
        for rider in fast.values:
            assert fast.values[rider] == pytest.approx(slow.values[rider], abs=1e-8)


# --- properties over synthetic seasons -------------------------------------

@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32), alpha=st.floats(0.05, 1.0), beta=st.floats(0.0, 1.0))
def test_conservation_and_nonnegativity(seed, alpha, beta):
    season = generate(SynthSpec(teams=2, riders_per_team=4, races=5, seed=seed))
    alloc = solve(season, Config(alpha, beta))
    totals = season_totals(season)
    sums = {team: 0.0 for team in season.teams}
    for rider, value in alloc.values.items():
        assert value >= 0.0
        sums[alloc.teams[rider]] += value
    for team, total in totals.per_team_points.items():
        assert abs(sums[team] - total) / max(total, 1.0) <= 1e-6


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32), beta=st.floats(0.0, 1.0))
def test_beta_mixes_corners_linearly_at_alpha_one(seed, beta):
    season = generate(SynthSpec(teams=1, riders_per_team=5, races=6, seed=seed))
    uci = solve(season, PRESETS["uci"])
    part = solve(season, PRESETS["part"])
    mid = solve(season, Config(1.0, beta))
    for rider in mid.values:
        expected = beta * uci.values[rider] + (1 - beta) * part.values[rider]
        assert math.isclose(mid.values[rider], expected, rel_tol=0, abs_tol=1e-10)
