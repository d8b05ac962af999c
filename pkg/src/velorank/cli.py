"""Command-line entry point for batch runs over season data directories.

Subcommands: ``validate``, ``solve``, ``sweep``, ``analyze``, ``synth``.
Every output file gets a ``<name>.manifest.json`` sibling recording the
argv, input hashes, resolved configuration, tool version and a timestamp;
the outputs themselves carry no timestamps, so identical inputs and flags
reproduce them byte for byte.

Exit codes: 0 success, 1 data or validation failure, 2 usage or
configuration error, 3 non-convergence.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, analysis, ingest, solver, sweep, synth

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2
EXIT_NONCONVERGENCE = 3

_PRESET_NAMES = tuple(solver.PRESETS)


class CliError(Exception):
    """Usage or configuration problem; maps to exit code 2."""


# ---------------------------------------------------------------------------
# config file and option resolution

def _load_config_file(path: Path) -> dict[str, str]:
    """Parse a key=value file; '#' starts a comment, blank lines ignored."""
    if not path.is_file():
        raise CliError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise CliError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _resolve_options(args: argparse.Namespace, spec: dict) -> dict:
    """Merge flag values over config-file values over defaults.

    ``spec`` maps option name to (converter, default); flags parse with
    default None so an explicit flag always wins.
    """
    file_values: dict[str, str] = {}
    config_path = getattr(args, "config", None)
    if config_path:
        file_values = _load_config_file(Path(config_path))
        for key in sorted(set(file_values) - set(spec)):
            print(f"warning: config key {key!r} not used by this command",
                  file=sys.stderr)
    resolved = {}
    for name, (convert, default) in spec.items():
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            resolved[name] = flag_value
        elif name in file_values:
            try:
                resolved[name] = convert(file_values[name])
            except (ValueError, TypeError) as exc:
                raise CliError(f"config key {name}: {exc}") from None
        else:
            resolved[name] = default
    return resolved


# These double as argparse types, so they raise ValueError, which argparse
# and _resolve_options both turn into exit code 2.

def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _preset_list(text: str) -> tuple[str, ...]:
    names = tuple(part.strip().lower() for part in text.split(",") if part.strip())
    for name in names:
        if name not in solver.PRESETS:
            raise ValueError(f"unknown preset {name!r}; expected one of {', '.join(_PRESET_NAMES)}")
    return names


_SOLVER_SPEC = {
    "tolerance": (float, 1e-10),
    "max_iterations": (int, 100_000),
    "backend": (str, None),
}


def _make_config(resolved: dict) -> solver.Config:
    preset_name = resolved.get("preset")
    alpha = resolved.get("alpha")
    beta = resolved.get("beta")
    if preset_name is not None and (alpha is not None or beta is not None):
        raise CliError("give either --preset or --alpha/--beta, not both")
    if preset_name is not None:
        return solver.preset(preset_name,
                             tolerance=resolved["tolerance"],
                             max_iterations=resolved["max_iterations"])
    if alpha is None or beta is None:
        raise CliError("either --preset or both --alpha and --beta are required")
    return solver.Config(alpha=alpha, beta=beta,
                         tolerance=resolved["tolerance"],
                         max_iterations=resolved["max_iterations"])


# ---------------------------------------------------------------------------
# inputs, outputs, manifests

def _data_files(args) -> tuple[Path, Path | None]:
    data_dir = Path(args.data_dir)
    directives = getattr(args, "directives", None)
    if directives:
        return data_dir, Path(directives)
    default = data_dir / "directives.csv"
    return data_dir, default if default.is_file() else None


def _load(args) -> tuple:
    data_dir, directives = _data_files(args)
    season, report = ingest.load_season(data_dir, directives=directives)
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return season, report, data_dir, directives


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _input_entries(data_dir: Path | None, directives: Path | None,
                   config_file: str | None) -> list[dict]:
    paths: list[Path] = []
    if data_dir is not None:
        paths.extend(data_dir / name for name in ("teams.csv", "riders.csv", "results.csv"))
    if directives is not None:
        paths.append(directives)
    if config_file:
        paths.append(Path(config_file))
    return [{"path": str(p), "sha256": _sha256(p)} for p in paths if p.is_file()]


def _write_manifest(out_path: Path, argv: list[str], inputs: list[dict],
                    config_echo: dict) -> None:
    """Record provenance next to ``out_path``; for a directory output the
    manifest goes inside it."""
    manifest = {
        "command": ["velorank", *argv],
        "inputs": inputs,
        "config": config_echo,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    if out_path.is_dir():
        manifest_path = out_path / "manifest.json"
    else:
        manifest_path = out_path.with_name(out_path.name + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")


def _write_lines(path: Path, lines: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _fmt6(x: float) -> str:
    return f"{x:.6f}"


# ---------------------------------------------------------------------------
# subcommands

def cmd_validate(args, argv) -> int:
    try:
        season, report, _, _ = _load(args)
    except ingest.InvalidSeason as exc:
        for violation in exc.violations:
            print(f"violation: {violation}", file=sys.stderr)
        return EXIT_DATA

    totals = report.totals
    per_team_days: dict[str, float] = {t: 0.0 for t in season.teams}
    per_team_races: dict[str, set] = {t: set() for t in season.teams}
    for row in season.results:
        per_team_days[row.team] += row.days
        per_team_races[row.team].add(row.race)

    def days_str(d: float) -> str:
        return str(int(d)) if d == int(d) else f"{d:g}"

    print(f"{'team':<16} {'riders':>7} {'races':>6} {'points':>14} {'days':>8}")
    for team in season.teams:
        print(f"{team:<16} {len(season.rosters[team]):>7} {len(per_team_races[team]):>6} "
              f"{totals.per_team_points[team]:>14.2f} {days_str(per_team_days[team]):>8}")
    print(f"{'TOTAL':<16} {totals.rider_count:>7} {totals.race_count:>6} "
          f"{totals.grand_total:>14.2f} {days_str(totals.total_days):>8}")
    return EXIT_OK


def cmd_solve(args, argv) -> int:
    spec = {
        "alpha": (float, None),
        "beta": (float, None),
        "preset": (str, None),
        **_SOLVER_SPEC,
    }
    resolved = _resolve_options(args, spec)
    # A flag beats the config file even across the preset/explicit split:
    # --preset silences file alpha/beta and vice versa.
    if args.preset is not None:
        if args.alpha is not None or args.beta is not None:
            raise CliError("give either --preset or --alpha/--beta, not both")
        resolved["alpha"] = resolved["beta"] = None
    elif args.alpha is not None or args.beta is not None:
        resolved["preset"] = None
    config = _make_config(resolved)
    season, _, data_dir, directives = _load(args)
    allocation = solver.solve(season, config, backend=resolved["backend"])
    ranking = analysis.rank(allocation)

    lines = ["rider_id,team_id,value,rank"]
    for entry in ranking.entries:
        lines.append(f"{entry.rider},{entry.team},{_fmt6(entry.value)},{entry.rank}")
    out = Path(args.output)
    _write_lines(out, lines)
    _write_manifest(out, argv,
                    _input_entries(data_dir, directives, getattr(args, "config", None)),
                    {"alpha": config.alpha, "beta": config.beta,
                     "preset": resolved.get("preset"),
                     "tolerance": config.tolerance,
                     "max_iterations": config.max_iterations,
                     "backend": resolved["backend"]})
    return EXIT_OK


def cmd_sweep(args, argv) -> int:
    spec = {
        "alpha_grid": (_float_list, None),
        "beta_grid": (_float_list, None),
        **_SOLVER_SPEC,
    }
    resolved = _resolve_options(args, spec)
    if resolved["alpha_grid"] is None and resolved["beta_grid"] is None:
        grid = sweep.default_grid()
    else:
        defaults = sweep.default_grid()
        grid = sweep.SweepGrid(
            alphas=resolved["alpha_grid"] or defaults.alphas,
            betas=resolved["beta_grid"] if resolved["beta_grid"] is not None else defaults.betas,
        )
    season, _, data_dir, directives = _load(args)
    result = sweep.run_sweep(season, grid,
                             tolerance=resolved["tolerance"],
                             max_iterations=resolved["max_iterations"],
                             backend=resolved["backend"])

    lines = ["alpha,beta,rider_id,value,rank"]
    for cell in result.cells:
        if cell.allocation is None:
            continue
        ranking = analysis.rank(cell.allocation)
        for entry in ranking.entries:
            lines.append(f"{_fmt6(cell.alpha)},{_fmt6(cell.beta)},"
                         f"{entry.rider},{_fmt6(entry.value)},{entry.rank}")
    out = Path(args.output)
    _write_lines(out, lines)
    _write_manifest(out, argv,
                    _input_entries(data_dir, directives, getattr(args, "config", None)),
                    {"alphas": list(grid.alphas), "betas": list(grid.betas),
                     "tolerance": resolved["tolerance"],
                     "max_iterations": resolved["max_iterations"],
                     "backend": resolved["backend"]})

    failures = result.failures()
    if failures:
        for cell in failures:
            print(f"cell (alpha={cell.alpha:g}, beta={cell.beta:g}) failed: {cell.error}",
                  file=sys.stderr)
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def cmd_analyze(args, argv) -> int:
    spec = {
        "baseline": (str, "uci"),
        "against": (_preset_list, ("part", "cosc", "ref")),
        "significance": (float, analysis.DEFAULT_SIGNIFICANCE),
        **_SOLVER_SPEC,
    }
    resolved = _resolve_options(args, spec)
    baseline_name = resolved["baseline"].lower()
    if baseline_name not in solver.PRESETS:
        raise CliError(f"unknown preset {baseline_name!r}; expected one of {', '.join(_PRESET_NAMES)}")
    against = resolved["against"]

    season, _, data_dir, directives = _load(args)

    def solve_preset(name: str) -> solver.Allocation:
        config = solver.preset(name, tolerance=resolved["tolerance"],
                               max_iterations=resolved["max_iterations"])
        return solver.solve(season, config, backend=resolved["backend"])

    baseline_alloc = solve_preset(baseline_name)
    reports = []
    for name in against:
        other = solve_preset(name)
        report = analysis.compare(baseline_alloc, other,
                                  significance=resolved["significance"])
        reports.append(report.to_dict())

    payload = {
        "baseline": solver.PRESETS[baseline_name].name,
        "significance": resolved["significance"],
        "comparisons": reports,
    }
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                   encoding="utf-8")
    _write_manifest(out, argv,
                    _input_entries(data_dir, directives, getattr(args, "config", None)),
                    {"baseline": baseline_name, "against": list(against),
                     "significance": resolved["significance"],
                     "tolerance": resolved["tolerance"],
                     "max_iterations": resolved["max_iterations"],
                     "backend": resolved["backend"]})
    return EXIT_OK


def cmd_synth(args, argv) -> int:
    spec = {
        "teams": (int, 4),
        "riders_per_team": (int, 6),
        "races": (int, 10),
        "leader_fraction": (float, 0.25),
        "points_scale": (float, 100.0),
        "seed": (int, 0),
    }
    resolved = _resolve_options(args, spec)
    synth_spec = synth.SynthSpec(**resolved)
    season = synth.generate(synth_spec)
    out_dir = Path(args.output)
    written = synth.write_season_csv(season, out_dir)
    _write_manifest(out_dir, argv,
                    _input_entries(None, None, getattr(args, "config", None)),
                    {**resolved, "files": [p.name for p in written]})
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def _add_common(parser: argparse.ArgumentParser, data: bool = True,
                solver_flags: bool = True) -> None:
    if data:
        parser.add_argument("data_dir", help="season data directory")
        parser.add_argument("--directives",
                            help="transfer directives CSV (default: <data_dir>/directives.csv if present)")
    parser.add_argument("--config", help="key=value config file; flags override it")
    if solver_flags:
        parser.add_argument("--tolerance", type=float, default=None,
                            help="fixed-point convergence tolerance (default 1e-10)")
        parser.add_argument("--max-iterations", type=int, default=None, dest="max_iterations",
                            help="iteration cap per team (default 100000)")
        parser.add_argument("--backend", choices=("python", "cython"), default=None,
                            help="force a solver kernel (default: compiled when available)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="velorank",
        description="Allocate season points among riders and compare the resulting rankings.",
    )
    parser.add_argument("--version", action="version", version=f"velorank {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("validate", help="check a data directory and print a summary")
    _add_common(p, solver_flags=False)
    p.set_defaults(func=cmd_validate)

    p = commands.add_parser("solve", help="solve one allocation and write a ranking CSV")
    _add_common(p)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--preset", choices=_PRESET_NAMES, default=None)
    p.add_argument("-o", "--output", required=True, help="allocation CSV path")
    p.set_defaults(func=cmd_solve)

    p = commands.add_parser("sweep", help="solve a parameter grid and write a long CSV")
    _add_common(p)
    p.add_argument("--alpha-grid", type=_float_list, default=None, dest="alpha_grid",
                   help="comma-separated alphas (default: 0.1..1.0 plus 1/3)")
    p.add_argument("--beta-grid", type=_float_list, default=None, dest="beta_grid",
                   help="comma-separated betas (default: 0..1.0)")
    p.add_argument("-o", "--output", required=True, help="sweep CSV path")
    p.set_defaults(func=cmd_sweep)

    p = commands.add_parser("analyze", help="compare preset allocations, write a JSON report")
    _add_common(p)
    p.add_argument("--baseline", default=None,
                   help="baseline preset (default uci)")
    p.add_argument("--against", type=_preset_list, default=None,
                   help="comma-separated presets to compare (default part,cosc,ref)")
    p.add_argument("--significance", type=float, default=None,
                   help="two-sided significance level for the flags (default 0.05)")
    p.add_argument("-o", "--output", required=True, help="report JSON path")
    p.set_defaults(func=cmd_analyze)

    p = commands.add_parser("synth", help="generate a synthetic season data directory")
    _add_common(p, data=False, solver_flags=False)
    p.add_argument("--teams", type=int, default=None)
    p.add_argument("--riders-per-team", type=int, default=None, dest="riders_per_team")
    p.add_argument("--races", type=int, default=None)
    p.add_argument("--leader-fraction", type=float, default=None, dest="leader_fraction")
    p.add_argument("--points-scale", type=float, default=None, dest="points_scale")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", required=True, help="directory for the CSV files")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except solver.InvalidConfig as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ImportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except solver.NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (ingest.IngestError, analysis.AnalysisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
