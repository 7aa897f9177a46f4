"""Fixed interval scheduling reduced to planning feasibility.

Tasks occupy inclusive period ranges; two tasks conflict when their ranges
share a period.  The image instance disables maintenance entirely (zero
check duration, zero flight hours, one period more calendar budget than the
horizon holds), so feasibility collapses to assigning every task window to
an eligible aircraft with no overlap, and the check-count objective is
constant zero over feasible solutions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

from .core import Aircraft, Cluster, Instance, Mission, Params, Solution
from .validate import check_solution

__all__ = [
    "FisError",
    "FisTask",
    "FisInstance",
    "fis_to_fmp",
    "fmp_solution_to_fis",
    "fis_brute_force_feasible",
    "assignment_respects_intervals",
    "load_fis",
    "save_fis",
    "fis_from_jsonable",
    "fis_to_jsonable",
]

FIS_FORMAT = "fmplan-fis"


class FisError(ValueError):
    pass


@dataclass(frozen=True)
class FisTask:
    id: str
    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise FisError(f"task {self.id}: start after end")
        if self.start < 1:
            raise FisError(f"task {self.id}: periods are 1-based")

    @property
    def duration(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class FisInstance:
    tasks: tuple[FisTask, ...]
    employees: tuple[str, ...]
    eligible: dict[str, frozenset[str]]  # task id -> employee ids
    by_employee: dict[str, frozenset[str]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ids = [t.id for t in self.tasks]
        if len(set(ids)) != len(ids):
            raise FisError("duplicate task ids")
        if len(set(self.employees)) != len(self.employees):
            raise FisError("duplicate employee ids")
        emp = set(self.employees)
        inverse: dict[str, set[str]] = {e: set() for e in self.employees}
        for task in self.tasks:
            who = self.eligible.get(task.id)
            if not who:
                raise FisError(f"task {task.id}: empty eligibility set")
            for e in who:
                if e not in emp:
                    raise FisError(f"task {task.id}: unknown employee {e}")
                inverse[e].add(task.id)
        object.__setattr__(
            self,
            "by_employee",
            {e: frozenset(v) for e, v in inverse.items()},
        )


def _overlap(a: FisTask, b: FisTask) -> bool:
    return max(a.start, b.start) <= min(a.end, b.end)


def assignment_respects_intervals(fis: FisInstance, assignment: dict[str, str]) -> bool:
    """Independent interval-arithmetic check of a task -> employee map."""
    if set(assignment) != {t.id for t in fis.tasks}:
        return False
    for task in fis.tasks:
        if assignment[task.id] not in fis.eligible[task.id]:
            return False
    by_task = {t.id: t for t in fis.tasks}
    for a, b in product(fis.tasks, fis.tasks):
        if a.id < b.id and assignment[a.id] == assignment[b.id]:
            if _overlap(by_task[a.id], by_task[b.id]):
                return False
    return True


def fis_brute_force_feasible(fis: FisInstance) -> dict[str, str] | None:
    """Enumerate eligible assignments; the first overlap-free one, or None."""
    tasks = list(fis.tasks)
    choices = [sorted(fis.eligible[t.id]) for t in tasks]
    for combo in product(*choices):
        assignment = {t.id: e for t, e in zip(tasks, combo)}
        if assignment_respects_intervals(fis, assignment):
            return assignment
    return None


def fis_to_fmp(fis: FisInstance) -> Instance:
    """Image of a fixed-interval-scheduling problem as a planning instance.

    One aircraft per employee and one mission per task over the task's
    period range, each requiring a single aircraft for at least the task
    duration.  Eligibility is carried on a per-task standard so the derived
    eligible sets reproduce the task's employee sets exactly.  Maintenance
    is switched off (zero-duration checks, calendar budgets one past the
    horizon), which every window helper supports as empty windows.
    """
    horizon = max((t.end for t in fis.tasks), default=1)
    params = Params(
        num_periods=horizon,
        check_duration=0,
        capacity=len(fis.employees),
        calendar_max=0,
        calendar_min=0,
        flight_max=0.0,
        default_usage=0.0,
        in_maintenance=(),
    )
    missions = tuple(
        Mission(
            id=task.id,
            start=task.start,
            end=task.end,
            hours=0.0,
            required=1,
            min_assign=max(task.duration, 1),
            mtype="fis",
            standard=f"elig:{task.id}",
        )
        for task in fis.tasks
    )
    fleet = tuple(
        Aircraft(
            id=e,
            atype="fis",
            standards=frozenset(
                f"elig:{task.id}" for task in fis.tasks if e in fis.eligible[task.id]
            ),
            rft_init=0.0,
            rct_init=horizon + 1,
            in_maint_remaining=0,
        )
        for e in fis.employees
    )
    clusters = (
        Cluster(
            id="K1",
            members=tuple(e for e in fis.employees),
            maint_cap=tuple([len(fis.employees)] * horizon),
            sustain_floor=tuple([0.0] * horizon),
            known_in_maint=tuple([0] * horizon),
        ),
    )
    return Instance(
        params=params,
        missions=missions,
        fleet=fleet,
        clusters=clusters,
        reduction_instance=True,
    )


def fmp_solution_to_fis(
    fis: FisInstance, instance: Instance, solution: Solution
) -> dict[str, str]:
    """Task -> employee map read off a feasible solution of the image.

    Each task goes to an aircraft that serves its mission over the whole
    window (one always exists: the requirement row at the first period
    forces a start there, and the minimum-assignment window pins that
    aircraft through the end).  Refuses infeasible solutions.
    """
    report = check_solution(instance, solution)
    if not report.feasible:
        raise FisError(
            f"solution is infeasible ({len(report.entries)} violations); "
            "cannot extract a task assignment"
        )
    assignment: dict[str, str] = {}
    for j, mission in enumerate(instance.missions):
        full = None
        for i in instance.sets.eligible[j]:
            if all(solution.grid[i][t] == mission.id for t in mission.window):
                full = instance.fleet[i].id
                break
        if full is None:
            raise FisError(f"no aircraft serves task {mission.id} over its window")
        assignment[mission.id] = full
    return assignment


# ---------------------------------------------------------------------------
# FIS document format
# ---------------------------------------------------------------------------


def fis_to_jsonable(fis: FisInstance) -> dict:
    return {
        "format": FIS_FORMAT,
        "version": 1,
        "employees": list(fis.employees),
        "tasks": [{"id": t.id, "start": t.start, "end": t.end} for t in fis.tasks],
        "eligibility": {t.id: sorted(fis.eligible[t.id]) for t in fis.tasks},
    }


def fis_from_jsonable(doc: dict) -> FisInstance:
    if doc.get("format") != FIS_FORMAT:
        raise FisError(f"not a fixed-interval document: format={doc.get('format')!r}")
    tasks = tuple(FisTask(t["id"], t["start"], t["end"]) for t in doc["tasks"])
    return FisInstance(
        tasks=tasks,
        employees=tuple(doc["employees"]),
        eligible={tid: frozenset(who) for tid, who in doc["eligibility"].items()},
    )


def save_fis(fis: FisInstance, path) -> None:
    Path(path).write_text(json.dumps(fis_to_jsonable(fis), indent=2) + "\n")


def load_fis(path) -> FisInstance:
    return fis_from_jsonable(json.loads(Path(path).read_text()))
