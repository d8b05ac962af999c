import json

import pytest

from velorank.cli import main

from conftest import RAW_POINTS, TEAM_TOTAL


def run(args):
    return main(list(args))


def read_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


# --- validate --------------------------------------------------------------

def test_validate_summary(worked_data_dir, capsys):
    assert run(["validate", str(worked_data_dir)]) == 0
    out = capsys.readouterr().out
    total = [line for line in out.splitlines() if line.startswith("TOTAL")][0]
    fields = total.split()
    assert fields[1:] == ["3", "4", "4200.00", "8"]


def test_validate_duplicate_row_exits_1(worked_data_dir, capsys):
    results = worked_data_dir / "results.csv"
    content = results.read_text(encoding="utf-8")
    results.write_text(content + "raceA,raceA,WT,tm,r1,50,1\n", encoding="utf-8")
    assert run(["validate", str(worked_data_dir)]) == 1
    assert "duplicate" in capsys.readouterr().err


def test_validate_missing_dir_exits_1(tmp_path, capsys):
    assert run(["validate", str(tmp_path / "nowhere")]) == 1
    assert "missing input file" in capsys.readouterr().err


# --- solve -----------------------------------------------------------------

def test_solve_preset_uci(worked_data_dir, tmp_path):
    out = tmp_path / "alloc.csv"
    assert run(["solve", str(worked_data_dir), "--preset", "uci", "-o", str(out)]) == 0
    rows = read_csv(out)
    assert [r["rider_id"] for r in rows] == ["r2", "r3", "r1"]
    assert [r["rank"] for r in rows] == ["1", "2", "3"]
    assert float(rows[2]["value"]) == RAW_POINTS["r1"]
    manifest = json.loads(
        out.with_name("alloc.csv.manifest.json").read_text(encoding="utf-8"))
    assert manifest["config"]["alpha"] == 1.0
    assert len(manifest["inputs"]) == 3
    assert all(len(e["sha256"]) == 64 for e in manifest["inputs"])


def test_solve_part_preset_values(worked_data_dir, tmp_path):
    out = tmp_path / "alloc.csv"
    assert run(["solve", str(worked_data_dir), "--preset", "part", "-o", str(out)]) == 0
    rows = {r["rider_id"]: float(r["value"]) for r in read_csv(out)}
    assert rows["r1"] == pytest.approx(1866.666667, abs=1e-4)
    assert rows["r2"] == pytest.approx(1166.666667, abs=1e-4)


def test_solve_alpha_zero_exits_2(worked_data_dir, tmp_path, capsys):
    code = run(["solve", str(worked_data_dir), "--alpha", "0", "--beta", "1",
                "-o", str(tmp_path / "x.csv")])
    assert code == 2
    assert "alpha" in capsys.readouterr().err


def test_solve_preset_and_alpha_conflict(worked_data_dir, tmp_path):
    assert run(["solve", str(worked_data_dir), "--preset", "uci",
                "--alpha", "0.5", "--beta", "1", "-o", str(tmp_path / "x.csv")]) == 2


def test_solve_requires_some_parameters(worked_data_dir, tmp_path):
    assert run(["solve", str(worked_data_dir), "-o", str(tmp_path / "x.csv")]) == 2


def test_solve_nonconvergence_exits_3(worked_data_dir, tmp_path):
    assert run(["solve", str(worked_data_dir), "--alpha", "0.1", "--beta", "1",
                "--max-iterations", "1", "-o", str(tmp_path / "x.csv")]) == 3


def test_solve_reruns_byte_identical(worked_data_dir, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["solve", str(worked_data_dir), "--preset", "cosc", "-o", str(a)])
    run(["solve", str(worked_data_dir), "--preset", "cosc", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_solve_backend_flag_does_not_change_bytes(worked_data_dir, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["solve", str(worked_data_dir), "--preset", "cosc",
         "--backend", "python", "-o", str(a)])
    run(["solve", str(worked_data_dir), "--preset", "cosc", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_config_file_with_flag_override(worked_data_dir, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha = 1.0\nbeta = 1.0  # raw points\ntolerance = 1e-9\n",
                   encoding="utf-8")
    out = tmp_path / "alloc.csv"
    assert run(["solve", str(worked_data_dir), "--config", str(cfg),
                "--beta", "0", "-o", str(out)]) == 0
    rows = {r["rider_id"]: float(r["value"]) for r in read_csv(out)}
    # beta flag overrode the file: participation corner, not raw points.
    assert rows["r1"] == pytest.approx(1866.666667, abs=1e-4)
    manifest = json.loads(
        out.with_name("alloc.csv.manifest.json").read_text(encoding="utf-8"))
    assert manifest["config"]["tolerance"] == 1e-9


def test_config_file_preset_silenced_by_flags(worked_data_dir, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("preset = part\n", encoding="utf-8")
    out = tmp_path / "alloc.csv"
    assert run(["solve", str(worked_data_dir), "--config", str(cfg),
                "--alpha", "1", "--beta", "1", "-o", str(out)]) == 0
    rows = {r["rider_id"]: float(r["value"]) for r in read_csv(out)}
    assert rows["r1"] == RAW_POINTS["r1"]


def test_bad_config_file_exits_2(worked_data_dir, tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("this is not a pair\n", encoding="utf-8")
    assert run(["solve", str(worked_data_dir), "--config", str(cfg),
                "--preset", "uci", "-o", str(tmp_path / "x.csv")]) == 2
    assert "key=value" in capsys.readouterr().err


# --- sweep -----------------------------------------------------------------

def test_sweep_corner_grid(worked_data_dir, tmp_path):
    out = tmp_path / "sweep.csv"
    assert run(["sweep", str(worked_data_dir), "--alpha-grid", "0.1,1",
                "--beta-grid", "0,1", "-o", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 12  # 3 riders x 4 cells
    cells = {(r["alpha"], r["beta"]) for r in rows}
    assert len(cells) == 4
    for alpha, beta in cells:
        cell_rows = [r for r in rows if (r["alpha"], r["beta"]) == (alpha, beta)]
        assert sum(float(r["value"]) for r in cell_rows) == pytest.approx(
            TEAM_TOTAL, abs=1e-4)


def test_sweep_reruns_byte_identical(worked_data_dir, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", str(worked_data_dir), "--alpha-grid", "0.1,0.5,1",
            "--beta-grid", "0,0.5,1"]
    run(args + ["-o", str(a)])
    run(args + ["-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_sweep_nonconvergent_cell_exits_3(worked_data_dir, tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code = run(["sweep", str(worked_data_dir), "--alpha-grid", "0.1,1",
                "--beta-grid", "1", "--max-iterations", "1", "-o", str(out)])
    assert code == 3
    assert "failed" in capsys.readouterr().err
    # The convergent cell is still in the file.
    assert len(read_csv(out)) == 3


# --- analyze ---------------------------------------------------------------

def test_analyze_self_comparison(worked_data_dir, tmp_path):
    out = tmp_path / "report.json"
    assert run(["analyze", str(worked_data_dir), "--baseline", "uci",
                "--against", "uci", "-o", str(out)]) == 0
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["baseline"] == "UCI"
    report = payload["comparisons"][0]
    full = report["segments"][0]
    assert full["points"]["pearson_r"] == pytest.approx(1.0, abs=1e-12)
    for i, row in enumerate(report["transition_percent"]):
        assert row[i] == 100.0


def test_analyze_default_compares_three_presets(worked_data_dir, tmp_path):
    out = tmp_path / "report.json"
    assert run(["analyze", str(worked_data_dir), "-o", str(out)]) == 0
    payload = json.loads(out.read_text(encoding="utf-8"))
    labels = [c["against"]["label"] for c in payload["comparisons"]]
    assert labels == ["PART", "CoSc", "REF"]


def test_analyze_unknown_preset_exits_2(worked_data_dir, tmp_path):
    assert run(["analyze", str(worked_data_dir), "--baseline", "elo",
                "-o", str(tmp_path / "r.json")]) == 2


# --- synth -----------------------------------------------------------------

def test_synth_roundtrip_validates(tmp_path, capsys):
    data = tmp_path / "season"
    assert run(["synth", "--teams", "2", "--riders-per-team", "4", "--races", "6",
                "--seed", "3", "-o", str(data)]) == 0
    assert run(["validate", str(data)]) == 0
    total = [line for line in capsys.readouterr().out.splitlines()
             if line.startswith("TOTAL")][0]
    assert total.split()[1] == "8"


def test_synth_same_seed_byte_identical(tmp_path):
    for name in ("a", "b"):
        run(["synth", "--seed", "21", "-o", str(tmp_path / name)])
    for filename in ("teams.csv", "riders.csv", "results.csv"):
        assert (tmp_path / "a" / filename).read_bytes() == \
            (tmp_path / "b" / filename).read_bytes()


def test_synth_solo_teams_make_part_equal_uci(tmp_path):
    data = tmp_path / "solo"
    run(["synth", "--teams", "3", "--riders-per-team", "1", "--races", "8",
         "--seed", "13", "-o", str(data)])
    uci_out, part_out = tmp_path / "uci.csv", tmp_path / "part.csv"
    run(["solve", str(data), "--preset", "uci", "-o", str(uci_out)])
    run(["solve", str(data), "--preset", "part", "-o", str(part_out)])
    uci_rows = {r["rider_id"]: r["value"] for r in read_csv(uci_out)}
    part_rows = {r["rider_id"]: r["value"] for r in read_csv(part_out)}
    assert uci_rows == part_rows


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exit_info:
        main(["--version"])
    assert exit_info.value.code == 0
    assert "velorank" in capsys.readouterr().out
