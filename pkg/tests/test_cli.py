"""Command-line flows: generate, build, heuristic, validate, ingest,
reduce, gantt, and a tiny experiment batch."""

import json

import pytest

from fmplan.cli import main
from fmplan.generate import GenConfig, config_to_jsonable, grid_to_jsonable, ScenarioGrid
from fmplan.io import load_instance, load_solution
from fmplan.reduction import FisInstance, FisTask, save_fis
from fmplan.validate import check_solution


@pytest.fixture
def config_file(tmp_path):
    cfg = GenConfig(seed=1001, num_periods=40)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config_to_jsonable(cfg)))
    return path


def test_generate_build_heuristic_validate_flow(tmp_path, config_file, capsys):
    out = tmp_path / "instances"
    assert main(["generate", "--config", str(config_file), "--out", str(out)]) == 0
    instance_path = out / "instance_000.json"
    assert instance_path.exists()

    lp_path = tmp_path / "model.lp"
    assert main(["build", "--instance", str(instance_path), "--lp", str(lp_path)]) == 0
    stats = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert stats["vars"] > 0 and stats["cons"] > 0
    assert lp_path.read_text().startswith("\\ fmplan model")

    solution_path = tmp_path / "solution.json"
    warm_path = tmp_path / "warm.txt"
    code = main(
        [
            "--seed", "3",
            "heuristic",
            "--instance", str(instance_path),
            "--time-limit", "60",
            "--iter-limit", "60000",
            "--out", str(solution_path),
            "--warmstart", str(warm_path),
        ]
    )
    assert code == 0
    result = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert result["outcome"] == "Feasible"

    assert main(["validate", "--instance", str(instance_path), "--solution", str(solution_path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["feasible"] is True

    # The warm start file ingests back into the same feasible solution.
    ingest_out = tmp_path / "ingested.json"
    assert warm_path.exists()
    code = main(
        [
            "ingest",
            "--instance", str(instance_path),
            "--values", str(warm_path),
            "--out", str(ingest_out),
        ]
    )
    assert code == 0
    instance = load_instance(instance_path)
    ingested = load_solution(ingest_out, instance)
    original = load_solution(solution_path, instance)
    assert ingested.grid == original.grid


def test_validate_flags_infeasible(tmp_path, config_file, capsys):
    out = tmp_path / "instances"
    main(["generate", "--config", str(config_file), "--out", str(out)])
    instance_path = out / "instance_000.json"
    instance = load_instance(instance_path)

    from fmplan.core import Solution
    from fmplan.io import save_solution

    empty = Solution.empty(instance)
    sol_path = tmp_path / "empty.json"
    save_solution(instance, empty, sol_path)
    code = main(["validate", "--instance", str(instance_path), "--solution", str(sol_path)])
    assert code == 1
    report = json.loads(capsys.readouterr().out)
    assert report["feasible"] is False and report["violations"]


def test_reduce_subcommand(tmp_path):
    fis = FisInstance(
        tasks=(FisTask("p1", 1, 3), FisTask("p2", 2, 4)),
        employees=("e1", "e2"),
        eligible={"p1": frozenset({"e1", "e2"}), "p2": frozenset({"e1", "e2"})},
    )
    fis_path = tmp_path / "fis.json"
    save_fis(fis, fis_path)
    out = tmp_path / "reduced.json"
    assert main(["reduce", "--fis", str(fis_path), "--out", str(out)]) == 0
    instance = load_instance(out)
    assert instance.reduction_instance
    assert instance.params.check_duration == 0
    assert len(instance.missions) == 2


def test_gantt_subcommand(tmp_path, config_file, capsys):
    out = tmp_path / "instances"
    main(["generate", "--config", str(config_file), "--out", str(out)])
    instance_path = out / "instance_000.json"
    solution_path = tmp_path / "solution.json"
    main(
        [
            "heuristic",
            "--instance", str(instance_path),
            "--iter-limit", "40000",
            "--time-limit", "60",
            "--out", str(solution_path),
        ]
    )
    capsys.readouterr()
    csv_path = tmp_path / "board.csv"
    assert main(
        [
            "gantt",
            "--instance", str(instance_path),
            "--solution", str(solution_path),
            "--csv", str(csv_path),
        ]
    ) == 0
    board = capsys.readouterr().out
    instance = load_instance(instance_path)
    solution = load_solution(solution_path, instance)
    assert "M" in board
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "aircraft,period,cell"
    # Cell contents track the state grid cell by cell.
    from fmplan.gantt import _cell_text

    row = lines[1].split(",")
    assert row[2] == _cell_text(instance, solution.grid[0][1])


def test_experiment_batch(tmp_path, capsys):
    grid = ScenarioGrid(
        base=GenConfig(seed=1001, num_periods=30, parallel_missions=1),
        overrides=(("check_duration", 4),),
        instances_per_scenario=2,
    )
    grid_path = tmp_path / "grid.json"
    grid_path.write_text(json.dumps(grid_to_jsonable(grid)))
    records_path = tmp_path / "records.json"
    summary_path = tmp_path / "summary.csv"
    code = main(
        [
            "--out-dir", str(tmp_path / "artifacts"),
            "experiment",
            "--grid", str(grid_path),
            "--pipeline", "validate",
            "--budget", "30",
            "--records", str(records_path),
            "--summary", str(summary_path),
        ]
    )
    assert code == 0
    records = json.loads(records_path.read_text())
    assert len(records) == 4
    assert {r["scenario"] for r in records} == {"base", "check_duration=4"}
    base_seeds = [r["seed"] for r in records if r["scenario"] == "base"]
    alt_seeds = [r["seed"] for r in records if r["scenario"] != "base"]
    assert base_seeds == alt_seeds
    summary = summary_path.read_text().splitlines()
    assert summary[0].startswith("scenario,")
    assert len(summary) == 3
    # Every emitted solution revalidates cleanly.
    for rec in records:
        if rec["outcome"] != "Feasible":
            continue
        scen_dir = tmp_path / "artifacts" / rec["scenario"]
        instance = load_instance(scen_dir / f"instance_{rec['index']:03d}.json")
        solution = load_solution(scen_dir / f"solution_{rec['index']:03d}.json", instance)
        assert check_solution(instance, solution).feasible
