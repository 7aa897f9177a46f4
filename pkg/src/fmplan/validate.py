"""Direct constraint evaluation, objective scoring, and a tiny exact oracle.

``check_solution`` mirrors the optimization model's rows exactly (shared
window arithmetic, shared tolerance); the mirror property between the two is
part of the acceptance suite.  ``brute_force_solve`` is an exhaustive
column-by-column search over state grids, guarded to desk-scale sizes, used
as the ground-truth optimum in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import kernels
from .core import CHECK_BODY, CHECK_START, FREE, Instance, Solution
from .kernels import (
    FAM_CALENDAR,
    FAM_CAPACITY,
    FAM_CLUSTER_SERV,
    FAM_CLUSTER_SUST,
    FAM_FLIGHT_TIME,
    FAM_INITIAL,
    FAM_MIN_ASSIGN,
    FAM_MISSION_REQ,
    FAM_RFT,
    FAM_STATE,
    FAMILY_NAMES,
    TOL,
)

__all__ = [
    "Violation",
    "ViolationReport",
    "derive_usage",
    "check_solution",
    "objective",
    "OBJ_CHECKS",
    "OBJ_CHECKS_RFT",
    "BruteForceResult",
    "brute_force_solve",
]

OBJ_CHECKS = "checks"
OBJ_CHECKS_RFT = "checks+rft"


@dataclass(frozen=True)
class Violation:
    family: str
    magnitude: float
    aircraft: str | None = None
    mission: str | None = None
    cluster: str | None = None
    period: int | None = None

    def location(self) -> str:
        parts = [
            f"{k}={v}"
            for k, v in (
                ("aircraft", self.aircraft),
                ("mission", self.mission),
                ("cluster", self.cluster),
                ("period", self.period),
            )
            if v is not None
        ]
        return ", ".join(parts)


@dataclass
class ViolationReport:
    entries: list[Violation] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.entries

    def count(self, family: str | None = None) -> int:
        if family is None:
            return len(self.entries)
        return sum(1 for v in self.entries if v.family == family)

    def total_magnitude(self) -> float:
        return sum(v.magnitude for v in self.entries)

    def to_jsonable(self) -> dict:
        return {
            "feasible": self.feasible,
            "violations": [
                {
                    "family": v.family,
                    "aircraft": v.aircraft,
                    "mission": v.mission,
                    "cluster": v.cluster,
                    "period": v.period,
                    "magnitude": v.magnitude,
                }
                for v in self.entries
            ],
        }


_MISSION_FAMILIES = {FAM_MISSION_REQ, FAM_MIN_ASSIGN}
_CLUSTER_FAMILIES = {FAM_CLUSTER_SERV, FAM_CLUSTER_SUST}


def _records_to_report(instance: Instance, records) -> ViolationReport:
    entries = []
    for fam, i, other, t, mag in sorted(records):
        aircraft = instance.fleet[i].id if i >= 0 else None
        mission = cluster = None
        if other >= 0:
            if fam in _MISSION_FAMILIES or fam == FAM_INITIAL:
                mission = instance.missions[other].id
            elif fam in _CLUSTER_FAMILIES:
                cluster = instance.clusters[other].id
        entries.append(
            Violation(
                family=FAMILY_NAMES[int(fam)],
                magnitude=float(mag),
                aircraft=aircraft,
                mission=mission,
                cluster=cluster,
                period=int(t) if t >= 0 else None,
            )
        )
    return ViolationReport(entries=entries)


def derive_usage(
    instance: Instance, solution: Solution, backend: str | None = None
) -> Solution:
    """Fill the canonical u/rft/rct ledgers in place and return the solution.

    u is the lower envelope consistent with the flight-time rows (mission
    hours, or the default usage when serviceable); rft follows the
    remaining-flight-time recurrence at equality, pinned to flight_max while
    a started check covers the period; rct is diagnostic bookkeeping only.
    """
    solution.validate_structure(instance)
    prob = kernels.pack_instance(instance)
    mission_of, start = kernels.grid_arrays(instance, solution)
    u, rft, _ = kernels.evaluate_grid(prob, mission_of, start, backend=backend)
    horizon = instance.horizon
    solution.u = [[float(x) for x in row] for row in u]
    solution.rft = [[float(x) for x in row] for row in rft]

    rct = []
    e_max = instance.params.calendar_max
    for i, a in enumerate(instance.fleet):
        row = [0.0] * (horizon + 1)
        row[0] = float(a.rct_init if a.in_maint_remaining == 0 else e_max)
        starts = {t for t in range(1, horizon + 1) if start[i, t]}
        for t in range(1, horizon + 1):
            m = instance.params.check_duration
            covered = any(s in starts for s in range(max(1, t - m + 1), t + 1))
            if covered or t <= a.in_maint_remaining:
                row[t] = float(e_max)
            else:
                row[t] = row[t - 1] - 1
        rct.append(row)
    solution.rct = rct
    return solution


def check_solution(
    instance: Instance, solution: Solution, backend: str | None = None
) -> ViolationReport:
    """One entry per violated constraint instance; empty iff feasible."""
    solution.validate_structure(instance)
    prob = kernels.pack_instance(instance)
    mission_of, start = kernels.grid_arrays(instance, solution)
    _, _, records = kernels.evaluate_grid(prob, mission_of, start, backend=backend)
    return _records_to_report(instance, records)


def objective(instance: Instance, solution: Solution, kind: str = OBJ_CHECKS) -> float:
    """Check count, or check count * flight_max minus final flight potential."""
    n_checks = sum(
        1
        for row in solution.grid
        for t in range(1, instance.horizon + 1)
        if row[t] == CHECK_START
    )
    if kind == OBJ_CHECKS:
        return float(n_checks)
    if kind == OBJ_CHECKS_RFT:
        if solution.rft is None:
            work = solution.copy()
            derive_usage(instance, work)
            rft = work.rft
        else:
            rft = solution.rft
        end_sum = sum(row[instance.horizon] for row in rft)
        return n_checks * instance.params.flight_max - end_sum
    raise ValueError(f"unknown objective kind {kind!r}")


def structural_infeasibility(instance: Instance) -> str | None:
    """Cheap certificates that no solution can exist, or None.

    Three sufficient conditions: a mission with fewer eligible aircraft
    than it requires; a period whose occupancy window must hold more forced
    check starts (plus known in-shop aircraft) than capacity allows; a
    first-period cluster flight-hour floor that even the best possible
    check boosts cannot reach.
    """
    from .core import initial_window_sets

    p = instance.params
    for j, mission in enumerate(instance.missions):
        if len(instance.sets.eligible[j]) < mission.required:
            return (
                f"mission {mission.id} requires {mission.required} aircraft but "
                f"only {len(instance.sets.eligible[j])} are eligible"
            )

    m = p.check_duration
    windows = []
    barred_empty = {}
    for a in instance.fleet:
        barred, forced = initial_window_sets(a, p)
        barred_empty[a.id] = len(barred) == 0
        if len(forced):
            windows.append((forced.start, forced.stop - 1))
    for tau in range(1, p.num_periods + 1):
        lo = max(1, tau - m + 1)
        forced_here = sum(1 for (a, b) in windows if a >= lo and b <= tau)
        if forced_here + p.known_in_maintenance(tau) > p.capacity:
            return (
                f"period {tau}: {forced_here} forced check starts plus "
                f"{p.known_in_maintenance(tau)} known in-shop exceed capacity {p.capacity}"
            )

    for aircraft in instance.fleet:
        if aircraft.preassigned is None:
            continue
        mission_id, elapsed = aircraft.preassigned
        mission = instance.mission_by_id(mission_id)
        pinned = min(max(0, mission.min_assign - elapsed), mission.end)
        if pinned < 1:
            continue
        # The pinned continuation forces its mission hours every period and
        # excludes any overlapping check, so the flight budget must cover it
        # and the forced check window must extend past it.
        need = pinned * max(mission.hours, p.default_usage)
        if aircraft.rft_init + TOL < need:
            return (
                f"aircraft {aircraft.id}: pinned continuation of {mission_id} "
                f"burns {need:.1f} flight hours against a budget of "
                f"{aircraft.rft_init:.1f}"
            )
        _barred, forced = initial_window_sets(aircraft, p)
        if len(forced) and forced.stop - 1 <= pinned:
            return (
                f"aircraft {aircraft.id}: a check is forced by period "
                f"{forced.stop - 1} but the continuation of {mission_id} is "
                f"pinned through period {pinned}"
            )

    slots = max(p.capacity - p.known_in_maintenance(1), 0)
    for cluster in instance.clusters:
        members = [instance.aircraft_by_id(aid) for aid in cluster.members]
        total = sum(a.rft_init for a in members)
        boosts = sorted(
            (p.flight_max - a.rft_init for a in members if barred_empty[a.id]),
            reverse=True,
        )
        best = total + sum(boosts[:slots])
        if best < cluster.sustain_floor[0] - TOL:
            return (
                f"cluster {cluster.id}: best reachable flight-hour sum {best:.1f} "
                f"is below the period-1 floor {cluster.sustain_floor[0]:.1f}"
            )
    return None


# ---------------------------------------------------------------------------
# Exhaustive oracle
# ---------------------------------------------------------------------------


@dataclass
class BruteForceResult:
    status: str  # "optimal" or "infeasible"
    solution: Solution | None
    value: float | None


def brute_force_solve(
    instance: Instance,
    kind: str = OBJ_CHECKS,
    max_aircraft: int = 3,
    max_periods: int = 8,
) -> BruteForceResult:
    """Exact optimum over all state grids, for tiny instances only.

    Column-by-column depth-first search with feasibility pruning derived
    directly from the constraint definitions (independent of the
    optimization model's rows).  Raises ValueError beyond the size guard.
    """
    n_i = len(instance.fleet)
    horizon = instance.horizon
    if n_i > max_aircraft or horizon > max_periods:
        raise ValueError(
            f"instance too large for exhaustive search: "
            f"{n_i} aircraft (max {max_aircraft}), {horizon} periods (max {max_periods})"
        )

    prob = kernels.pack_instance(instance)
    p = instance.params
    M = p.check_duration
    span = M + p.calendar_min - 1  # no-restart stretch after a start
    h_max = p.flight_max
    float_kind = kind == OBJ_CHECKS_RFT

    sets = instance.sets
    n_j = len(instance.missions)
    FREE_OPT, START_OPT = -1, -2

    # occupancy[t] counts checks covering t (known in-shop plus placed);
    # cluster occupancy likewise.  Mission coverage per (j, t of column).
    occupancy = [p.known_in_maintenance(t) for t in range(horizon + 2)]
    k_occ = [
        [int(prob.k_known[k, t]) if t <= horizon else 0 for t in range(horizon + 2)]
        for k in range(len(instance.clusters))
    ]
    clusters_of = [
        [k for k in range(len(instance.clusters)) if prob.member[k, i]]
        for i in range(n_i)
    ]

    cells = [[FREE_OPT] * (horizon + 1) for _ in range(n_i)]  # option codes
    rft = [[0.0] * (horizon + 1) for _ in range(n_i)]
    for i in range(n_i):
        rft[i][0] = float(prob.rft0[i])

    last_start = [0] * n_i  # most recent in-horizon start, 0 = none
    start_count_in_forced = [0] * n_i
    next_deadline = [0] * n_i  # forced-successor deadline after an early start
    next_satisfied = [True] * n_i

    best_value: float | None = None
    best_cells: list[list[int]] | None = None
    checks_placed = 0

    mission_opts = [
        [
            [j for j in sets.active_at[t] if i in sets.eligible[j]]
            for t in range(horizon + 1)
        ]
        for i in range(n_i)
    ]

    def covered_by_own(i: int, t: int) -> bool:
        s = last_start[i]
        return s > 0 and s >= t - M + 1

    def bound_value() -> float:
        if not float_kind:
            return float(checks_placed)
        return checks_placed * h_max - sum(
            rft[i][current_t[0] - 1] for i in range(n_i)
        )

    current_t = [1]

    def place(i: int, t: int, opt: int) -> bool:
        """Apply option; return False if an incremental check fails."""
        cells[i][t] = opt
        if opt == START_OPT:
            if t <= prob.barred_until[i]:
                return False
            s = last_start[i]
            if s > 0 and t <= s + span:
                return False
            # A pending forced-successor window [lo, hi] is automatically
            # entered here: lo = s + span and the spacing check above already
            # forces t > s + span, while t > hi was pruned at the deadline.
            for tb in range(t, min(t + M - 1, horizon) + 1):
                occupancy[tb] += 1
                if occupancy[tb] > p.capacity:
                    return False
                for k in clusters_of[i]:
                    k_occ[k][tb] += 1
                    if k_occ[k][tb] > prob.k_cap[k, tb]:
                        return False
        return True

    def search(i: int, t: int):
        nonlocal best_value, best_cells, checks_placed
        if t > horizon:
            value = (
                checks_placed * h_max - sum(rft[i][horizon] for i in range(n_i))
                if float_kind
                else float(checks_placed)
            )
            if best_value is None or value < best_value - 1e-9:
                best_value = value
                best_cells = [row[:] for row in cells]
            return
        if i == n_i:
            # Column complete: coverage, flight-time ledger, cluster floors.
            for j in sets.active_at[t]:
                covered = sum(
                    1 for ii in sets.eligible[j] if cells[ii][t] == j
                )
                if covered < instance.missions[j].required:
                    return
            for ii in range(n_i):
                opt = cells[ii][t]
                in_check = covered_by_own(ii, t) or t <= prob.nm[ii]
                hours = prob.m_hours[opt] if opt >= 0 else 0.0
                if not in_check:
                    hours = max(hours, p.default_usage)
                if hours > prob.usage_ub + TOL:
                    return
                credit = h_max if opt == START_OPT else 0.0
                rft[ii][t] = min(rft[ii][t - 1] + credit - hours, h_max)
                if rft[ii][t] < -TOL:
                    return
            for k in range(len(instance.clusters)):
                total = sum(
                    rft[ii][t] for ii in range(n_i) if prob.member[k, ii]
                )
                if total < prob.k_floor[k, t] - TOL:
                    return
            current_t[0] = t + 1
            search(0, t + 1)
            current_t[0] = t
            return

        if best_value is not None and bound_value() >= best_value - 1e-9:
            return

        # A start is due right now when the initial forced window or a
        # forced-successor window closes at t with no start yet.
        must_start = (
            prob.forced_hi[i] >= prob.forced_lo[i]
            and t == prob.forced_hi[i]
            and start_count_in_forced[i] == 0
        ) or (
            next_deadline[i] != 0 and not next_satisfied[i] and t == next_deadline[i]
        )

        # Forced cells: known in-shop prefix, body of an own running check,
        # pinned pre-horizon assignment continuation, pinned fresh run.
        if t <= prob.nm[i] or covered_by_own(i, t):
            if must_start:
                return
            search(i + 1, t)
            return
        if prob.pre_mission[i] >= 0 and t <= prob.pre_until[i]:
            if must_start:
                return
            cells[i][t] = int(prob.pre_mission[i])
            search(i + 1, t)
            cells[i][t] = FREE_OPT
            return
        pin = _pinned_mission(i, t)
        if pin is not None:
            if must_start:
                return
            cells[i][t] = pin
            search(i + 1, t)
            cells[i][t] = FREE_OPT
            return

        options: list[int] = []
        if not must_start:
            options.extend(mission_opts[i][t])
            options.append(FREE_OPT)
        options.append(START_OPT)

        for opt in options:
            saved_occ = None
            if opt == START_OPT:
                saved = (
                    last_start[i],
                    start_count_in_forced[i],
                    next_deadline[i],
                    next_satisfied[i],
                    checks_placed,
                )
                saved_occ = [
                    (tb, occupancy[tb], [k_occ[k][tb] for k in clusters_of[i]])
                    for tb in range(t, min(t + M - 1, horizon) + 1)
                ]
                ok = place(i, t, opt)
                if ok:
                    last_start[i] = t
                    checks_placed += 1
                    if prob.forced_lo[i] <= t <= prob.forced_hi[i]:
                        start_count_in_forced[i] += 1
                    lo = max(1, t + M + p.calendar_min - 1)
                    hi = min(t + M + p.calendar_max - 1, prob.tm_guard, horizon)
                    if hi >= lo and not lo <= t <= hi:
                        # A degenerate window can contain the start itself,
                        # in which case the successor row is self-satisfied.
                        next_deadline[i] = hi
                        next_satisfied[i] = False
                    else:
                        next_deadline[i] = 0
                        next_satisfied[i] = True
                    search(i + 1, t)
                (
                    last_start[i],
                    start_count_in_forced[i],
                    next_deadline[i],
                    next_satisfied[i],
                    checks_placed,
                ) = saved
                for tb, occ_val, k_vals in saved_occ:
                    occupancy[tb] = occ_val
                    for k, val in zip(clusters_of[i], k_vals):
                        k_occ[k][tb] = val
                cells[i][t] = FREE_OPT
            else:
                cells[i][t] = opt
                search(i + 1, t)
                cells[i][t] = FREE_OPT

    def _pinned_mission(i: int, t: int) -> int | None:
        # A fresh run start within the trailing min-assignment window pins
        # the assignment (the stronger printed form spans MT_j + 1 periods).
        row = cells[i]
        prev = row[t - 1] if t > 1 else -1
        if prev < 0:
            return None
        j = prev
        mt = int(prob.m_minasg[j])
        if t > prob.m_end[j]:
            return None
        t0 = t - 1
        while t0 > 1 and row[t0 - 1] == j:
            t0 -= 1
        if t0 == 1 and prob.pre_mission[i] == j:
            return None  # continuation of a pre-horizon run is never pinned
        if t <= t0 + mt:
            return j
        return None

    search(0, 1)

    if best_cells is None:
        return BruteForceResult(status="infeasible", solution=None, value=None)

    grid = []
    for i, a in enumerate(instance.fleet):
        row = [FREE] * (horizon + 1)
        for t in range(1, min(a.in_maint_remaining, horizon) + 1):
            row[t] = CHECK_BODY
        for t in range(1, horizon + 1):
            opt = best_cells[i][t]
            if opt == START_OPT:
                row[t] = CHECK_START
                for tb in range(t + 1, min(t + M - 1, horizon) + 1):
                    row[tb] = CHECK_BODY
            elif opt >= 0:
                row[t] = instance.missions[opt].id
        grid.append(row)
    solution = Solution(grid=grid)
    derive_usage(instance, solution)
    return BruteForceResult(status="optimal", solution=solution, value=best_value)
