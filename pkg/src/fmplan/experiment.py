"""Batch experiment harness: scenario grids through a staged pipeline.

Each (scenario, instance index) runs generate -> build -> heuristic ->
validate up to the requested stage, with per-stage wall times; failures are
recorded and the batch continues.  Records merge deterministically by
(scenario, index) regardless of worker count.
"""

from __future__ import annotations

import csv
import io
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .anneal import SaParams, sa_solve
from .generate import GenerationError, ScenarioGrid, expand_grid, generate_instance
from .io import save_instance, save_solution, solution_to_csv
from .mip import ModelError, ModelStats, build_model, fix_initial_conditions, model_stats
from .lpfile import emit_lp
from .validate import (
    OBJ_CHECKS,
    OBJ_CHECKS_RFT,
    check_solution,
    objective,
    structural_infeasibility,
)

__all__ = ["RunRecord", "run_experiment", "summarize_records", "records_csv"]

PIPELINE_STAGES = ("generate", "build", "heuristic", "validate")


@dataclass
class RunRecord:
    scenario: str
    index: int
    seed: int
    outcome: str  # Feasible | Infeasible | NoSolution
    objective_checks: float | None = None
    objective_hours: float | None = None
    stats: ModelStats | None = None
    times: dict | None = None
    error: str | None = None

    def to_row(self) -> dict:
        row = {
            "scenario": self.scenario,
            "index": self.index,
            "seed": self.seed,
            "outcome": self.outcome,
            "objective_checks": self.objective_checks,
            "objective_hours": self.objective_hours,
            "error": self.error or "",
        }
        if self.stats is not None:
            row.update(
                vars=self.stats.n_vars,
                cons=self.stats.n_cons,
                nonzeros=self.stats.n_nonzeros,
            )
        else:
            row.update(vars=None, cons=None, nonzeros=None)
        for stage in PIPELINE_STAGES:
            row[f"t_{stage}"] = (self.times or {}).get(stage)
        return row


def _run_one(task) -> RunRecord:
    scenario, index, config, pipeline, budget, out_dir = task
    depth = PIPELINE_STAGES.index(pipeline)
    times: dict[str, float] = {}
    record = RunRecord(
        scenario=scenario, index=index, seed=config.seed, outcome="NoSolution", times=times
    )
    base = None
    if out_dir is not None:
        base = Path(out_dir) / scenario
        base.mkdir(parents=True, exist_ok=True)

    t0 = time.monotonic()
    try:
        instance = generate_instance(config)
    except GenerationError as exc:
        record.error = f"generate: {exc}"
        record.outcome = "Infeasible"
        return record
    times["generate"] = time.monotonic() - t0
    if base is not None:
        save_instance(instance, base / f"instance_{index:03d}.json")
    certificate = structural_infeasibility(instance)
    if certificate is not None:
        record.outcome = "Infeasible"
        record.error = certificate
        return record
    if depth < 1:
        record.outcome = "NoSolution"
        return record

    t0 = time.monotonic()
    try:
        model = fix_initial_conditions(build_model(instance, config.objective), instance)
    except ModelError as exc:
        record.error = f"build: {exc}"
        record.outcome = "Infeasible"
        return record
    times["build"] = time.monotonic() - t0
    record.stats = model_stats(model)
    if base is not None:
        (base / f"model_{index:03d}.lp").write_text(emit_lp(model))
    if depth < 2:
        return record

    t0 = time.monotonic()
    params = SaParams(time_limit=budget, seed=config.seed, objective=config.objective)
    solution, trace = sa_solve(instance, params)
    times["heuristic"] = time.monotonic() - t0
    if base is not None:
        save_solution(instance, solution, base / f"solution_{index:03d}.json")
        (base / f"solution_{index:03d}.csv").write_text(
            solution_to_csv(instance, solution)
        )
    if trace.outcome != "Feasible":
        record.outcome = "NoSolution"
        record.error = f"heuristic: {trace.outcome} after {trace.iterations} iterations"
        return record

    if depth >= 3:
        t0 = time.monotonic()
        report = check_solution(instance, solution)
        times["validate"] = time.monotonic() - t0
        if not report.feasible:
            record.outcome = "NoSolution"
            record.error = f"validate: {len(report.entries)} violations"
            return record

    record.outcome = "Feasible"
    record.objective_checks = objective(instance, solution, OBJ_CHECKS)
    record.objective_hours = objective(instance, solution, OBJ_CHECKS_RFT)
    return record


def run_experiment(
    grid: ScenarioGrid,
    pipeline: str = "heuristic",
    out_dir=None,
    budget: float = 60.0,
    workers: int = 1,
) -> list[RunRecord]:
    """Run every (scenario, index) through the pipeline; never raises per
    instance, always returns one record each."""
    if pipeline not in PIPELINE_STAGES:
        raise ValueError(f"pipeline must be one of {PIPELINE_STAGES}")
    # expand_grid orders scenario-major; recover the per-scenario index.
    tasks = []
    counters: dict[str, int] = {}
    for scenario, config, _seed in expand_grid(grid):
        idx = counters.get(scenario, 0)
        counters[scenario] = idx + 1
        tasks.append((scenario, idx, config, pipeline, budget, out_dir))

    if workers <= 1 or len(tasks) <= 1:
        records = [_safe_run(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_safe_run, tasks))
    records.sort(key=lambda r: (r.scenario != "base", r.scenario, r.index))
    return records


def _safe_run(task) -> RunRecord:
    try:
        return _run_one(task)
    except Exception as exc:  # stage failure must not sink the batch
        scenario, index, config = task[0], task[1], task[2]
        return RunRecord(
            scenario=scenario,
            index=index,
            seed=config.seed,
            outcome="NoSolution",
            error=f"unexpected: {exc.__class__.__name__}: {exc}\n{traceback.format_exc(limit=3)}",
        )


def summarize_records(records: list[RunRecord]) -> list[dict]:
    """Per-scenario means over the batch (times, sizes, outcome counts)."""
    scenarios: dict[str, list[RunRecord]] = {}
    for r in records:
        scenarios.setdefault(r.scenario, []).append(r)

    def mean(values):
        values = [v for v in values if v is not None]
        return round(sum(values) / len(values), 4) if values else None

    out = []
    for scenario, rows in scenarios.items():
        out.append(
            {
                "scenario": scenario,
                "instances": len(rows),
                "feasible": sum(1 for r in rows if r.outcome == "Feasible"),
                "infeasible": sum(1 for r in rows if r.outcome == "Infeasible"),
                "no_solution": sum(1 for r in rows if r.outcome == "NoSolution"),
                "t_generate_avg": mean([(r.times or {}).get("generate") for r in rows]),
                "t_build_avg": mean([(r.times or {}).get("build") for r in rows]),
                "t_heuristic_avg": mean([(r.times or {}).get("heuristic") for r in rows]),
                "vars_avg": mean([r.stats.n_vars if r.stats else None for r in rows]),
                "cons_avg": mean([r.stats.n_cons if r.stats else None for r in rows]),
                "nonzeros_avg": mean([r.stats.n_nonzeros if r.stats else None for r in rows]),
                "objective_checks_avg": mean([r.objective_checks for r in rows]),
            }
        )
    return out


def records_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()
