"""Command-line interface.

Subcommands: generate, build, ingest, validate, heuristic, reduce,
experiment, gantt.  External solving stays a file exchange: ``build`` emits
an LP file, any solver writes "name value" lines, ``ingest`` turns those
back into a solution document.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .anneal import SaParams, sa_solve
from .experiment import records_csv, run_experiment, summarize_records
from .generate import (
    ConfigError,
    GenConfig,
    ScenarioGrid,
    config_from_jsonable,
    expand_grid,
    generate_instance,
    grid_from_jsonable,
)
from .gantt import gantt_csv, render_gantt
from .io import (
    load_instance,
    load_solution,
    save_instance,
    save_solution,
    solution_to_csv,
)
from .lpfile import emit_lp
from .mip import (
    build_model,
    encode_solution,
    extract_solution,
    fix_initial_conditions,
    format_var_values,
    model_stats,
    parse_var_values,
)
from .reduction import fis_to_fmp, load_fis
from .validate import OBJ_CHECKS, OBJ_CHECKS_RFT, check_solution, objective

log = logging.getLogger("fmplan")


class _JsonFormatter(logging.Formatter):
    def format(self, record):
        payload = {
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        return json.dumps(payload)


def _setup_logging(json_logs: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    if json_logs:
        handler.setFormatter(_JsonFormatter())
    else:
        handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    logging.basicConfig(level=logging.INFO, handlers=[handler], force=True)


def _objective_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--objective",
        choices=[OBJ_CHECKS, OBJ_CHECKS_RFT],
        default=OBJ_CHECKS,
        help="objective kind (check count, or checks plus final flight-hour potential)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmplan",
        description="Fleet flight and maintenance planning toolkit",
    )
    parser.add_argument("--version", action="version", version=f"fmplan {__version__}")
    parser.add_argument("--json-logs", action="store_true", help="log as JSON lines")
    parser.add_argument("--out-dir", type=Path, default=None, help="default output directory")
    parser.add_argument("--workers", type=int, default=1, help="parallel workers where supported")
    parser.add_argument("--seed", type=int, default=None, help="override config seeds")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate instance files from a config or grid")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("build", help="build the model and emit an LP file")
    p.add_argument("--instance", type=Path, required=True)
    _objective_arg(p)
    p.add_argument("--lp", type=Path, required=True)

    p = sub.add_parser("ingest", help="turn external solver values into a solution")
    p.add_argument("--instance", type=Path, required=True)
    p.add_argument("--values", type=Path, required=True)
    _objective_arg(p)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("validate", help="check a solution against its instance")
    p.add_argument("--instance", type=Path, required=True)
    p.add_argument("--solution", type=Path, required=True)

    p = sub.add_parser("heuristic", help="search for a feasible solution")
    p.add_argument("--instance", type=Path, required=True)
    p.add_argument("--time-limit", type=float, default=600.0)
    p.add_argument("--iter-limit", type=int, default=100_000)
    _objective_arg(p)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument(
        "--warmstart",
        type=Path,
        default=None,
        help="also write solver warm-start values ('name value' lines)",
    )
    p.add_argument(
        "--warmstart-any",
        action="store_true",
        help="write the warm start even when the best solution is infeasible",
    )

    p = sub.add_parser("reduce", help="map a fixed-interval scheduling file to an instance")
    p.add_argument("--fis", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("experiment", help="run a scenario grid through the pipeline")
    p.add_argument("--grid", type=Path, required=True)
    p.add_argument(
        "--pipeline",
        choices=["generate", "build", "heuristic", "validate"],
        default="heuristic",
    )
    p.add_argument("--budget", type=float, default=60.0, help="heuristic seconds per instance")
    p.add_argument("--records", type=Path, default=None, help="write raw records JSON here")
    p.add_argument("--summary", type=Path, default=None, help="write summary CSV here")

    p = sub.add_parser("gantt", help="render a solution as a schedule board")
    p.add_argument("--instance", type=Path, required=True)
    p.add_argument("--solution", type=Path, required=True)
    p.add_argument("--out", type=Path, default=None, help="write the text board here")
    p.add_argument("--csv", type=Path, default=None, help="write the CSV twin here")
    return parser


def _cmd_generate(args) -> int:
    doc = json.loads(args.config.read_text())
    args.out.mkdir(parents=True, exist_ok=True)
    if doc.get("format") == "fmplan-grid":
        grid = grid_from_jsonable(doc)
        if args.seed is not None:
            grid = ScenarioGrid(
                base=GenConfig(**{**_config_kwargs(grid.base), "seed": args.seed}),
                overrides=grid.overrides,
                instances_per_scenario=grid.instances_per_scenario,
            )
        for scenario, config, _seed in expand_grid(grid):
            sub = args.out / scenario
            sub.mkdir(parents=True, exist_ok=True)
            idx = sum(1 for _ in sub.glob("instance_*.json"))
            instance = generate_instance(config)
            path = sub / f"instance_{idx:03d}.json"
            save_instance(instance, path)
            log.info("wrote %s", path)
    else:
        config = config_from_jsonable(doc)
        if args.seed is not None:
            config = GenConfig(**{**_config_kwargs(config), "seed": args.seed})
        instance = generate_instance(config)
        path = args.out / "instance_000.json"
        save_instance(instance, path)
        log.info("wrote %s", path)
    return 0


def _config_kwargs(config: GenConfig) -> dict:
    from dataclasses import fields

    return {f.name: getattr(config, f.name) for f in fields(GenConfig)}


def _cmd_build(args) -> int:
    instance = load_instance(args.instance)
    model = fix_initial_conditions(build_model(instance, args.objective), instance)
    args.lp.parent.mkdir(parents=True, exist_ok=True)
    args.lp.write_text(emit_lp(model))
    stats = model_stats(model)
    print(
        json.dumps(
            {
                "lp": str(args.lp),
                "vars": stats.n_vars,
                "cons": stats.n_cons,
                "nonzeros": stats.n_nonzeros,
                "binary": stats.n_binary,
            }
        )
    )
    return 0


def _cmd_ingest(args) -> int:
    instance = load_instance(args.instance)
    model = fix_initial_conditions(build_model(instance, args.objective), instance)
    values = parse_var_values(args.values.read_text())
    solution = extract_solution(model, values, instance)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    save_solution(instance, solution, args.out)
    report = check_solution(instance, solution)
    print(json.dumps({"solution": str(args.out), "feasible": report.feasible}))
    return 0


def _cmd_validate(args) -> int:
    instance = load_instance(args.instance)
    solution = load_solution(args.solution, instance)
    from .validate import derive_usage

    derive_usage(instance, solution)
    report = check_solution(instance, solution)
    doc = report.to_jsonable()
    doc["objective_checks"] = objective(instance, solution, OBJ_CHECKS)
    doc["objective_hours"] = objective(instance, solution, OBJ_CHECKS_RFT)
    print(json.dumps(doc, indent=2))
    return 0 if report.feasible else 1


def _cmd_heuristic(args) -> int:
    instance = load_instance(args.instance)
    seed = args.seed if args.seed is not None else 0
    params = SaParams(
        time_limit=args.time_limit,
        iter_limit=args.iter_limit,
        seed=seed,
        objective=args.objective,
    )
    solution, trace = sa_solve(instance, params)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    save_solution(instance, solution, args.out)
    if args.warmstart is not None and (trace.outcome == "Feasible" or args.warmstart_any):
        model = fix_initial_conditions(build_model(instance, args.objective), instance)
        values = encode_solution(model, instance, solution)
        args.warmstart.write_text(format_var_values(values, skip_zero=True))
    print(
        json.dumps(
            {
                "outcome": trace.outcome,
                "iterations": trace.iterations,
                "wall_time": round(trace.wall_time, 3),
                "objective_checks": objective(instance, solution, OBJ_CHECKS),
            }
        )
    )
    return 0 if trace.outcome == "Feasible" else 2


def _cmd_reduce(args) -> int:
    fis = load_fis(args.fis)
    instance = fis_to_fmp(fis)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    save_instance(instance, args.out)
    log.info("wrote %s", args.out)
    return 0


def _cmd_experiment(args) -> int:
    doc = json.loads(args.grid.read_text())
    grid = grid_from_jsonable(doc)
    if args.seed is not None:
        grid = ScenarioGrid(
            base=GenConfig(**{**_config_kwargs(grid.base), "seed": args.seed}),
            overrides=grid.overrides,
            instances_per_scenario=grid.instances_per_scenario,
        )
    records = run_experiment(
        grid,
        pipeline=args.pipeline,
        out_dir=args.out_dir,
        budget=args.budget,
        workers=args.workers,
    )
    rows = [r.to_row() for r in records]
    summary = summarize_records(records)
    if args.records is not None:
        args.records.parent.mkdir(parents=True, exist_ok=True)
        args.records.write_text(json.dumps(rows, indent=2) + "\n")
    if args.summary is not None:
        args.summary.parent.mkdir(parents=True, exist_ok=True)
        args.summary.write_text(records_csv(summary))
    print(records_csv(summary))
    return 0


def _cmd_gantt(args) -> int:
    instance = load_instance(args.instance)
    solution = load_solution(args.solution, instance)
    board = render_gantt(instance, solution)
    if args.out is not None:
        args.out.write_text(board)
    else:
        print(board, end="")
    if args.csv is not None:
        args.csv.write_text(gantt_csv(instance, solution))
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "build": _cmd_build,
    "ingest": _cmd_ingest,
    "validate": _cmd_validate,
    "heuristic": _cmd_heuristic,
    "reduce": _cmd_reduce,
    "experiment": _cmd_experiment,
    "gantt": _cmd_gantt,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.json_logs)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
