"""Parameter sweeps: solve one season over a grid of mixing parameters.

Cells are solved independently by default so any subset can be reproduced
standalone; ``warm_start=True`` seeds each cell with the previous cell's
values as a speed option.  A cell that fails to converge is recorded with
its error instead of aborting the rest of the grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from . import analysis
from .ingest import UnknownRider
from .model import RiderId, Season
from .solver import Allocation, Config, InvalidConfig, NonConvergence, solve

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_ITERATIONS = 100_000


@dataclass(frozen=True)
class SweepGrid:
    alphas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self):
        if not self.alphas or not self.betas:
            raise InvalidConfig("sweep grid must have at least one alpha and one beta")
        for a in self.alphas:
            if not 0.0 < a <= 1.0:
                raise InvalidConfig(f"grid alpha {a} outside (0, 1]")
        for b in self.betas:
            if not 0.0 <= b <= 1.0:
                raise InvalidConfig(f"grid beta {b} outside [0, 1]")
        object.__setattr__(self, "alphas", tuple(sorted(set(self.alphas))))
        object.__setattr__(self, "betas", tuple(sorted(set(self.betas))))

    def cells(self) -> list[tuple[float, float]]:
        """Row-major: alpha outer, beta inner."""
        return [(a, b) for a in self.alphas for b in self.betas]


def default_grid() -> SweepGrid:
    """Tenth steps over both axes plus alpha = 1/3, so all four named
    presets land on exact grid cells."""
    alphas = {i / 10 for i in range(1, 11)} | {1.0 / 3.0}
    betas = {i / 10 for i in range(11)}
    return SweepGrid(alphas=tuple(alphas), betas=tuple(betas))


@dataclass(frozen=True)
class SweepCell:
    alpha: float
    beta: float
    allocation: Allocation | None
    error: str | None = None

    @property
    def converged(self) -> bool:
        return self.allocation is not None

    @cached_property
    def ranks(self) -> dict[RiderId, int]:
        if self.allocation is None:
            return {}
        return dict(analysis.rank(self.allocation).position)


@dataclass(frozen=True)
class SweepResult:
    grid: SweepGrid
    cells: tuple[SweepCell, ...]

    def cell(self, alpha: float, beta: float) -> SweepCell:
        for c in self.cells:
            if c.alpha == alpha and c.beta == beta:
                return c
        raise KeyError(f"no cell at (alpha={alpha}, beta={beta})")

    def failures(self) -> tuple[SweepCell, ...]:
        return tuple(c for c in self.cells if not c.converged)


def run_sweep(season: Season, grid: SweepGrid | None = None,
              tolerance: float = DEFAULT_TOLERANCE,
              max_iterations: int = DEFAULT_MAX_ITERATIONS,
              backend: str | None = None,
              warm_start: bool = False) -> SweepResult:
    """Solve every grid cell, in row-major order."""
    if grid is None:
        grid = default_grid()
    cells = []
    previous = None
    for alpha, beta in grid.cells():
        config = Config(alpha=alpha, beta=beta, tolerance=tolerance,
                        max_iterations=max_iterations)
        try:
            allocation = solve(season, config, backend=backend,
                               initial=previous if warm_start else None)
        except NonConvergence as exc:
            cells.append(SweepCell(alpha, beta, None, error=str(exc)))
        else:
            cells.append(SweepCell(alpha, beta, allocation))
            previous = allocation.values
    return SweepResult(grid=grid, cells=tuple(cells))


def rider_trajectory(result: SweepResult,
                     rider: RiderId) -> list[tuple[float, float, float, int]]:
    """(alpha, beta, value, rank) across converged cells, grid order."""
    known = False
    out = []
    for cell in result.cells:
        if cell.allocation is None:
            continue
        known = True
        if rider not in cell.allocation.values:
            raise UnknownRider(f"rider {rider!r} not in this season")
        out.append((cell.alpha, cell.beta, cell.allocation.values[rider],
                    cell.ranks[rider]))
    if not known:
        raise UnknownRider(f"no converged cells to look up rider {rider!r} in")
    return out
