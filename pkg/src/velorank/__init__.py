"""Season points allocation for cycling teams.

Splits each team's season points among its riders with a tunable mix of
raw scoring, participation, and a mutually reinforcing share term solved
as a per-team fixed point, then ranks and compares the outcomes.
"""

from ._kernels import ACTIVE_BACKEND, available_backends
from .analysis import (
    ComparisonReport,
    DegenerateSeries,
    Ranking,
    compare,
    kendall_tau_b,
    pearson,
    rank,
    transition_matrix,
)
from .ingest import IngestError, IngestReport, InvalidSeason, load_season, validate
from .model import RaceResult, Season, aggregate, season_totals
from .solver import (
    PRESETS,
    Allocation,
    Config,
    InvalidConfig,
    NonConvergence,
    component_values,
    oracle_solve,
    preset,
    solve,
    solve_unweighted,
)
from .sweep import SweepGrid, SweepResult, default_grid, rider_trajectory, run_sweep
from .synth import SynthSpec, generate, write_season_csv

__version__ = "0.1.0"

__all__ = [
    "ACTIVE_BACKEND",
    "Allocation",
    "ComparisonReport",
    "Config",
    "DegenerateSeries",
    "IngestError",
    "IngestReport",
    "InvalidConfig",
    "InvalidSeason",
    "NonConvergence",
    "PRESETS",
    "RaceResult",
    "Ranking",
    "Season",
    "SweepGrid",
    "SweepResult",
    "SynthSpec",
    "aggregate",
    "available_backends",
    "compare",
    "component_values",
    "default_grid",
    "generate",
    "kendall_tau_b",
    "load_season",
    "oracle_solve",
    "pearson",
    "preset",
    "rank",
    "rider_trajectory",
    "run_sweep",
    "season_totals",
    "solve",
    "solve_unweighted",
    "transition_matrix",
    "validate",
    "write_season_csv",
    "__version__",
]
