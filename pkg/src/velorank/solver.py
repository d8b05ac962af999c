"""Per-team allocation of season points via a weighted fixed-point rule.

Each rider's value mixes three ingredients controlled by ``alpha`` and
``beta``::

    x_i = alpha*beta * P_i
        + sum over races r of
            [ alpha*(1-beta) * d_i/d(r)
              + (1-alpha) * d_i*w_i*x_i / sum_j d_j*w_j*x_j ] * p(r)

where ``P_i`` is the rider's own season points, ``p(r)`` the team's points in
race ``r``, ``d_i`` days started, and ``w_i = p_i/p(r)`` the rider's share of
the race points.  The last term makes every rider's value depend on their
teammates', so each team is solved as an independent fixed-point problem.

At ``alpha = 1`` the rule is closed-form: ``beta = 1`` returns raw points and
``beta = 0`` the participation-proportional split.  ``alpha = 0`` is rejected;
the pure co-scoring rule is ill-defined when riders have no solo races, which
is why the CoSc preset regularises it with ``alpha = 0.1``.

Teams are solved in canonical id order and all arithmetic is sequenced
identically across backends, so results are deterministic bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, NamedTuple

from . import _kernels
from .model import RaceResult, RiderId, Season, TeamId

DAMP_AFTER = 1000
COSCORE_ALPHA = 0.1
ORACLE_TOLERANCE = 1e-12


class SolverError(Exception):
    pass


class InvalidConfig(SolverError):
    pass


class NonConvergence(SolverError):
    def __init__(self, team: TeamId, iterations: int, residual: float, detail: str = ""):
        self.team = team
        self.iterations = iterations
        self.residual = residual
        msg = f"team {team!r}: no fixed point after {iterations} iterations (residual {residual:.3e})"
        if detail:
            msg += f"; {detail}"
        super().__init__(msg)


@dataclass(frozen=True)
class Config:
    """Mixing parameters plus solver tolerances.

    ``alpha`` in (0, 1] weighs the points/participation reference against the
    co-scoring share; ``beta`` in [0, 1] weighs raw points against the
    participation split inside that reference.
    """

    alpha: float
    beta: float
    tolerance: float = 1e-10
    max_iterations: int = 100_000
    name: str | None = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidConfig(f"alpha must be positive (got {self.alpha}); alpha = 0 is ill-defined")
        if self.alpha > 1 or not 0 <= self.beta <= 1:
            raise InvalidConfig(f"(alpha, beta) = ({self.alpha}, {self.beta}) outside (0,1] x [0,1]")
        if not self.tolerance > 0:
            raise InvalidConfig(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise InvalidConfig(f"max_iterations must be >= 1, got {self.max_iterations}")

    def label(self) -> str:
        return self.name or f"(alpha={self.alpha:g}, beta={self.beta:g})"


PRESETS: dict[str, Config] = {
    "uci": Config(alpha=1.0, beta=1.0, name="UCI"),
    "part": Config(alpha=1.0, beta=0.0, name="PART"),
    "cosc": Config(alpha=COSCORE_ALPHA, beta=1.0, name="CoSc"),
    "ref": Config(alpha=1.0 / 3.0, beta=0.5, name="REF"),
}


def preset(name: str, tolerance: float | None = None, max_iterations: int | None = None) -> Config:
    try:
        base = PRESETS[name.lower()]
    except KeyError:
        raise InvalidConfig(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}") from None
    return Config(
        alpha=base.alpha,
        beta=base.beta,
        tolerance=base.tolerance if tolerance is None else tolerance,
        max_iterations=base.max_iterations if max_iterations is None else max_iterations,
        name=base.name,
    )


@dataclass(frozen=True)
class Allocation:
    """A solved points allocation: one non-negative value per rider.

    Per team the values sum to the team's season points (to within the
    solver tolerance); ``teams`` records each rider's team so downstream
    rankings need not re-derive it.
    """

    config: Config
    values: Mapping[RiderId, float]
    teams: Mapping[RiderId, TeamId]
    iterations_by_team: Mapping[TeamId, int]
    residual_by_team: Mapping[TeamId, float]

    def total(self) -> float:
        return sum(self.values.values())


class CornerValues(NamedTuple):
    uci: float
    participation: float
    coscore: float


@dataclass(frozen=True)
class _TeamSystem:
    riders: tuple[RiderId, ...]
    season_points: tuple[float, ...]
    base: tuple[float, ...]
    x0: tuple[float, ...]
    race_ptr: tuple[int, ...]
    race_idx: tuple[int, ...]
    race_coef: tuple[float, ...]
    race_pts: tuple[float, ...]
    team_points: float


def _group_races(rows: tuple[RaceResult, ...]) -> list[tuple[str, list[RaceResult]]]:
    grouped: dict[str, list[RaceResult]] = {}
    for row in rows:
        grouped.setdefault(row.race, []).append(row)
    out = []
    for race in sorted(grouped):
        out.append((race, sorted(grouped[race], key=lambda r: r.rider)))
    return out


def _team_system(season: Season, team: TeamId, alpha: float, beta: float,
                 weighted: bool) -> _TeamSystem:
    """Assemble the per-team fixed-point system in canonical order.

    Races with zero team points contribute nothing to any term and are
    skipped outright (their weights are zero by convention).  The share
    coefficients are ``d_i * w_i`` for the weighted rule and plain ``d_i``
    for the unweighted one.
    """
    riders = season.rosters[team]
    index = {rider: i for i, rider in enumerate(riders)}
    n = len(riders)

    points = [0.0] * n
    for row in season.results_by_team[team]:
        points[index[row.rider]] += row.points

    if weighted:
        base = [alpha * beta * p for p in points]
        part_coef = alpha * (1.0 - beta)
    else:
        # Unweighted co-scoring has no raw-points reference; alpha weighs the
        # per-race participation split against the share term directly.
        base = [0.0] * n
        part_coef = alpha

    ptr = [0]
    idx: list[int] = []
    coef: list[float] = []
    pts: list[float] = []
    team_points = 0.0

    for race, rows in _group_races(season.results_by_team[team]):
        p = 0.0
        d = 0.0
        for row in rows:
            p += row.points
            d += row.days
        team_points += p
        if p <= 0.0:
            continue
        share_pts = (1.0 - alpha) * p
        for row in rows:
            if row.days <= 0.0:
                continue
            i = index[row.rider]
            base[i] += part_coef * (row.days / d) * p
            c = row.days * (row.points / p) if weighted else row.days
            if c > 0.0:
                idx.append(i)
                coef.append(c)
        if len(idx) > ptr[-1]:
            ptr.append(len(idx))
            pts.append(share_pts)

    x0 = list(base)
    if team_points > 0.0 and max(base, default=0.0) == 0.0:
        # Unreachable for valid data (every scorer gets a positive base term)
        # but keeps the iteration well-posed if it ever happens.
        uniform = team_points / n
        x0 = [uniform] * n

    return _TeamSystem(
        riders=riders,
        season_points=tuple(points),
        base=tuple(base),
        x0=tuple(x0),
        race_ptr=tuple(ptr),
        race_idx=tuple(idx),
        race_coef=tuple(coef),
        race_pts=tuple(pts),
        team_points=team_points,
    )


def _solve_team(kernel, system: _TeamSystem, config: Config, team: TeamId,
                skip_iteration: bool):
    if skip_iteration or not system.race_pts:
        return list(system.base), 0, 0.0
    x, iterations, residual, status = kernel(
        system.x0, system.base, system.race_ptr, system.race_idx,
        system.race_coef, system.race_pts,
        config.tolerance, config.max_iterations, DAMP_AFTER,
    )
    if status == _kernels.ZERO_DENOMINATOR:
        raise NonConvergence(team, iterations, residual,
                             "share denominator reached zero, data violates positivity")
    if status != _kernels.CONVERGED:
        raise NonConvergence(team, iterations, residual)
    return list(x), iterations, residual


def _solve(season: Season, config: Config, weighted: bool, backend: str | None,
           initial: Mapping[RiderId, float] | None = None) -> Allocation:
    kernel = _kernels.get_kernel(backend)
    skip_iteration = config.alpha == 1.0
    values: dict[RiderId, float] = {}
    teams: dict[RiderId, TeamId] = {}
    iterations: dict[TeamId, int] = {}
    residuals: dict[TeamId, float] = {}
    for team in season.teams:
        system = _team_system(season, team, config.alpha, config.beta, weighted)
        if initial is not None:
            # Warm start; fall back to the base term wherever the guess is
            # not positive so share denominators stay positive.
            guess = tuple(
                initial[r] if initial.get(r, 0.0) > 0.0 else b
                for r, b in zip(system.riders, system.base)
            )
            system = replace(system, x0=guess)
        x, its, res = _solve_team(kernel, system, config, team, skip_iteration)
        for rider, value in zip(system.riders, x):
            values[rider] = value
            teams[rider] = team
        iterations[team] = its
        residuals[team] = res
    return Allocation(
        config=config,
        values=values,
        teams=teams,
        iterations_by_team=iterations,
        residual_by_team=residuals,
    )


def solve(season: Season, config: Config, backend: str | None = None,
          initial: Mapping[RiderId, float] | None = None) -> Allocation:
    """Solve the weighted allocation for every team of the season.

    ``initial`` optionally warm-starts the iteration from a previous
    allocation's values.  Raises :class:`NonConvergence` if any team's
    iteration exhausts ``config.max_iterations``.
    """
    return _solve(season, config, weighted=True, backend=backend, initial=initial)


def solve_unweighted(season: Season, config: Config, backend: str | None = None) -> Allocation:
    """Solve the unweighted co-scoring variant, for comparison panels only.

    Every participant's share coefficient is their days started, ignoring how
    the race points split.  This variant has no raw-points reference, so
    ``config.beta`` does not enter: ``alpha`` directly weighs the per-race
    participation split against the share term, and ``alpha = 1`` returns the
    participation corner.
    """
    return _solve(season, config, weighted=False, backend=backend)


def component_values(season: Season, tolerance: float = 1e-10,
                     max_iterations: int = 100_000) -> dict[RiderId, CornerValues]:
    """The three corner distributions per rider: raw points, the
    participation split, and the co-scoring value at ``alpha = 0.1``."""
    uci = solve(season, Config(1.0, 1.0, tolerance, max_iterations))
    part = solve(season, Config(1.0, 0.0, tolerance, max_iterations))
    cosc = solve(season, Config(COSCORE_ALPHA, 1.0, tolerance, max_iterations))
    return {
        rider: CornerValues(uci.values[rider], part.values[rider], cosc.values[rider])
        for rider in uci.values
    }


def race_shares(coefs, xs) -> list[float]:
    """Split one unit proportionally to ``coef_i * x_i``.

    Scale-invariant in ``xs``: multiplying every entry by c > 0 leaves the
    shares unchanged.
    """
    total = 0.0
    for c, x in zip(coefs, xs):
        total += c * x
    if not total > 0.0:
        raise ZeroDivisionError("all coef * x products vanish")
    return [c * x / total for c, x in zip(coefs, xs)]


def oracle_solve(season: Season, config: Config) -> Allocation:
    """Independent cross-check: the same fixed points by plain damped
    substitution from a uniform positive start, at a tighter tolerance.

    Intended for small seasons; shares no iteration code with :func:`solve`.
    """
    values: dict[RiderId, float] = {}
    teams_map: dict[RiderId, TeamId] = {}
    iterations: dict[TeamId, int] = {}
    residuals: dict[TeamId, float] = {}

    for team in season.teams:
        riders = season.rosters[team]
        rows = season.results_by_team[team]
        races = _group_races(rows)
        season_points = {rider: 0.0 for rider in riders}
        for row in rows:
            season_points[row.rider] += row.points
        team_points = sum(sum(r.points for r in group) for _, group in races)
        participants = sorted({row.rider for row in rows if row.days > 0})

        def evaluate(x: dict[str, float]) -> dict[str, float]:
            new = {rider: config.alpha * config.beta * season_points[rider] for rider in riders}
            for _, group in races:
                p = sum(r.points for r in group)
                if p <= 0:
                    continue
                d = sum(r.days for r in group)
                starters = [r for r in group if r.days > 0]
                for r in starters:
                    new[r.rider] += config.alpha * (1 - config.beta) * (r.days / d) * p
                if config.alpha < 1.0:
                    coefs = [r.days * (r.points / p) for r in starters]
                    shares = race_shares(coefs, [x[r.rider] for r in starters])
                    for r, share in zip(starters, shares):
                        new[r.rider] += (1 - config.alpha) * share * p
            return new

        if config.alpha == 1.0 or not participants:
            x = evaluate({rider: 0.0 for rider in riders})
            iterations[team] = 0
            residuals[team] = 0.0
        else:
            uniform = team_points / len(participants) if team_points > 0 else 1.0
            x = {rider: (uniform if rider in set(participants) else 0.0) for rider in riders}
            done = 0
            residual = math.inf
            while True:
                fx = evaluate(x)
                residual = max(
                    abs(fx[r] - x[r]) / max(x[r], 1.0) for r in riders
                )
                if residual <= ORACLE_TOLERANCE:
                    break
                done += 1
                if done > config.max_iterations:
                    raise NonConvergence(team, done, residual, "oracle")
                x = {r: 0.5 * (fx[r] + x[r]) for r in riders}
            iterations[team] = done
            residuals[team] = residual

        for rider in riders:
            values[rider] = x[rider]
            teams_map[rider] = team

    return Allocation(
        config=config,
        values=values,
        teams=teams_map,
        iterations_by_team=iterations,
        residual_by_team=residuals,
    )
