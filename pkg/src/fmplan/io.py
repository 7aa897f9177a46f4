"""JSON and CSV serialization for instances and solutions.

Instance documents are self-describing and versioned; field names mirror
the domain vocabulary.  Serialization is deterministic: the same object
always produces byte-identical text.
"""

from __future__ import annotations

import io as _io
import json
import csv
from pathlib import Path

from .core import Aircraft, Cluster, Instance, InstanceError, Mission, Params, Solution

__all__ = [
    "instance_to_jsonable",
    "instance_from_jsonable",
    "dumps_instance",
    "loads_instance",
    "save_instance",
    "load_instance",
    "solution_to_jsonable",
    "solution_from_jsonable",
    "save_solution",
    "load_solution",
    "solution_to_csv",
]

INSTANCE_FORMAT = "fmplan-instance"
SOLUTION_FORMAT = "fmplan-solution"
FORMAT_VERSION = 1


def instance_to_jsonable(instance: Instance) -> dict:
    p = instance.params
    return {
        "format": INSTANCE_FORMAT,
        "version": FORMAT_VERSION,
        "reduction_instance": instance.reduction_instance,
        "params": {
            "num_periods": p.num_periods,
            "check_duration": p.check_duration,
            "capacity": p.capacity,
            "calendar_max": p.calendar_max,
            "calendar_min": p.calendar_min,
            "flight_max": p.flight_max,
            "default_usage": p.default_usage,
            "in_maintenance": list(p.in_maintenance),
        },
        "missions": [
            {
                "id": m.id,
                "start": m.start,
                "end": m.end,
                "hours": m.hours,
                "required": m.required,
                "min_assign": m.min_assign,
                "mtype": m.mtype,
                "standard": m.standard,
            }
            for m in instance.missions
        ],
        "fleet": [
            {
                "id": a.id,
                "atype": a.atype,
                "standards": sorted(a.standards),
                "rft_init": a.rft_init,
                "rct_init": a.rct_init,
                "in_maint_remaining": a.in_maint_remaining,
                "preassigned": (
                    None
                    if a.preassigned is None
                    else {"mission": a.preassigned[0], "elapsed": a.preassigned[1]}
                ),
            }
            for a in instance.fleet
        ],
        "clusters": [
            {
                "id": c.id,
                "members": list(c.members),
                "maint_cap": list(c.maint_cap),
                "sustain_floor": list(c.sustain_floor),
                "known_in_maint": list(c.known_in_maint),
            }
            for c in instance.clusters
        ],
    }


def instance_from_jsonable(doc: dict) -> Instance:
    if doc.get("format") != INSTANCE_FORMAT:
        raise InstanceError(f"not an instance document: format={doc.get('format')!r}")
    if doc.get("version") != FORMAT_VERSION:
        raise InstanceError(f"unsupported instance version {doc.get('version')!r}")
    pd = doc["params"]
    params = Params(
        num_periods=pd["num_periods"],
        check_duration=pd["check_duration"],
        capacity=pd["capacity"],
        calendar_max=pd["calendar_max"],
        calendar_min=pd["calendar_min"],
        flight_max=pd["flight_max"],
        default_usage=pd["default_usage"],
        in_maintenance=tuple(pd.get("in_maintenance", ())),
    )
    missions = tuple(
        Mission(
            id=m["id"],
            start=m["start"],
            end=m["end"],
            hours=m["hours"],
            required=m["required"],
            min_assign=m["min_assign"],
            mtype=m["mtype"],
            standard=m.get("standard"),
        )
        for m in doc.get("missions", ())
    )
    fleet = tuple(
        Aircraft(
            id=a["id"],
            atype=a["atype"],
            standards=frozenset(a.get("standards", ())),
            rft_init=a["rft_init"],
            rct_init=a["rct_init"],
            in_maint_remaining=a.get("in_maint_remaining", 0),
            preassigned=(
                None
                if a.get("preassigned") is None
                else (a["preassigned"]["mission"], a["preassigned"]["elapsed"])
            ),
        )
        for a in doc.get("fleet", ())
    )
    clusters = tuple(
        Cluster(
            id=c["id"],
            members=tuple(c["members"]),
            maint_cap=tuple(c["maint_cap"]),
            sustain_floor=tuple(c["sustain_floor"]),
            known_in_maint=tuple(c["known_in_maint"]),
        )
        for c in doc.get("clusters", ())
    )
    return Instance(
        params=params,
        missions=missions,
        fleet=fleet,
        clusters=clusters,
        reduction_instance=doc.get("reduction_instance", False),
    )


def dumps_instance(instance: Instance) -> str:
    return json.dumps(instance_to_jsonable(instance), indent=2) + "\n"


def loads_instance(text: str) -> Instance:
    return instance_from_jsonable(json.loads(text))


def save_instance(instance: Instance, path) -> None:
    Path(path).write_text(dumps_instance(instance))


def load_instance(path) -> Instance:
    return loads_instance(Path(path).read_text())


def solution_to_jsonable(instance: Instance, solution: Solution) -> dict:
    doc = {
        "format": SOLUTION_FORMAT,
        "version": FORMAT_VERSION,
        "aircraft": [a.id for a in instance.fleet],
        "states": [row[1:] for row in solution.grid],
    }
    doc["u"] = None if solution.u is None else [row[1:] for row in solution.u]
    doc["rft"] = None if solution.rft is None else [list(row) for row in solution.rft]
    doc["rct"] = None if solution.rct is None else [list(row) for row in solution.rct]
    return doc


def solution_from_jsonable(doc: dict, instance: Instance) -> Solution:
    if doc.get("format") != SOLUTION_FORMAT:
        raise InstanceError(f"not a solution document: format={doc.get('format')!r}")
    if doc.get("version") != FORMAT_VERSION:
        raise InstanceError(f"unsupported solution version {doc.get('version')!r}")
    ids = [a.id for a in instance.fleet]
    if doc.get("aircraft") != ids:
        raise InstanceError("solution aircraft list does not match the instance fleet")
    grid = [[""] + list(states) for states in doc["states"]]
    solution = Solution(grid=grid)
    if doc.get("u") is not None:
        solution.u = [[0.0] + [float(x) for x in row] for row in doc["u"]]
    if doc.get("rft") is not None:
        solution.rft = [[float(x) for x in row] for row in doc["rft"]]
    if doc.get("rct") is not None:
        solution.rct = [[float(x) for x in row] for row in doc["rct"]]
    solution.validate_structure(instance)
    return solution


def save_solution(instance: Instance, solution: Solution, path) -> None:
    text = json.dumps(solution_to_jsonable(instance, solution), indent=2) + "\n"
    Path(path).write_text(text)


def load_solution(path, instance: Instance) -> Solution:
    return solution_from_jsonable(json.loads(Path(path).read_text()), instance)


def solution_to_csv(instance: Instance, solution: Solution) -> str:
    """Flat per-cell export: aircraft, period, state, u, rft, rct."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["aircraft", "period", "state", "u", "rft", "rct"])
    for i, a in enumerate(instance.fleet):
        for t in range(1, instance.horizon + 1):
            u = solution.u[i][t] if solution.u is not None else ""
            rft = solution.rft[i][t] if solution.rft is not None else ""
            rct = solution.rct[i][t] if solution.rct is not None else ""
            writer.writerow([a.id, t, solution.grid[i][t], u, rft, rct])
    return buf.getvalue()
