"""Packed array form of an instance and a solution grid.

The evaluation kernels (pure Python and compiled) work on flat numpy arrays
rather than the domain objects.  Packing is done once per instance; grids
convert cheaply in both directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import (
    CHECK_BODY,
    CHECK_START,
    FREE,
    Instance,
    Solution,
    initial_window_sets,
)

__all__ = ["GridProblem", "pack_instance", "grid_arrays", "solution_from_arrays"]


@dataclass
class GridProblem:
    """Instance data flattened for the grid kernels, positional indices."""

    horizon: int
    n_aircraft: int
    n_missions: int
    n_clusters: int
    check_duration: int
    calendar_min: int
    calendar_max: int
    capacity: int
    flight_max: float
    default_usage: float
    usage_ub: float
    known_in_maint: np.ndarray  # int64[T+1], index 0 unused
    m_start: np.ndarray  # int64[n_j]
    m_end: np.ndarray
    m_hours: np.ndarray  # float64[n_j]
    m_req: np.ndarray  # int64[n_j]
    m_minasg: np.ndarray  # int64[n_j]
    eligible: np.ndarray  # uint8[n_j, n_i]
    nm: np.ndarray  # int64[n_i]
    rft0: np.ndarray  # float64[n_i]
    barred_until: np.ndarray  # int64[n_i]; no start at t <= barred_until
    forced_lo: np.ndarray  # int64[n_i]; forced-start window, hi < lo = none
    forced_hi: np.ndarray
    pre_mission: np.ndarray  # int64[n_i], -1 = none
    pre_until: np.ndarray  # int64[n_i]; assignment pinned for t in 1..pre_until
    member: np.ndarray  # uint8[n_k, n_i]
    k_cap: np.ndarray  # int64[n_k, T+1]
    k_floor: np.ndarray  # float64[n_k, T+1]
    k_known: np.ndarray  # int64[n_k, T+1]
    tm_guard: int  # forced-next rows generated only for t <= tm_guard


def pack_instance(instance: Instance) -> GridProblem:
    p = instance.params
    horizon = p.num_periods
    n_i = len(instance.fleet)
    n_j = len(instance.missions)
    n_k = len(instance.clusters)

    known = np.zeros(horizon + 1, dtype=np.int64)
    for t in range(1, horizon + 1):
        known[t] = p.known_in_maintenance(t)

    m_start = np.zeros(n_j, dtype=np.int64)
    m_end = np.zeros(n_j, dtype=np.int64)
    m_hours = np.zeros(n_j, dtype=np.float64)
    m_req = np.zeros(n_j, dtype=np.int64)
    m_minasg = np.zeros(n_j, dtype=np.int64)
    eligible = np.zeros((n_j, n_i), dtype=np.uint8)
    for j, m in enumerate(instance.missions):
        m_start[j] = m.start
        m_end[j] = m.end
        m_hours[j] = m.hours
        m_req[j] = m.required
        m_minasg[j] = m.min_assign
        for i in instance.sets.eligible[j]:
            eligible[j, i] = 1

    nm = np.zeros(n_i, dtype=np.int64)
    rft0 = np.zeros(n_i, dtype=np.float64)
    barred = np.zeros(n_i, dtype=np.int64)
    forced_lo = np.ones(n_i, dtype=np.int64)
    forced_hi = np.zeros(n_i, dtype=np.int64)
    pre_mission = np.full(n_i, -1, dtype=np.int64)
    pre_until = np.zeros(n_i, dtype=np.int64)
    for i, a in enumerate(instance.fleet):
        nm[i] = a.in_maint_remaining
        rft0[i] = a.rft_init
        no_start, forced = initial_window_sets(a, p)
        barred[i] = no_start.stop - 1 if len(no_start) else 0
        if len(forced):
            forced_lo[i] = forced.start
            forced_hi[i] = forced.stop - 1
        else:
            forced_lo[i], forced_hi[i] = 1, 0
        if a.preassigned is not None:
            mission_id, elapsed = a.preassigned
            j = instance.sets.mission_pos[mission_id]
            pre_mission[i] = j
            remaining = max(0, instance.missions[j].min_assign - elapsed)
            pre_until[i] = min(remaining, int(m_end[j]))

    member = np.zeros((n_k, n_i), dtype=np.uint8)
    k_cap = np.zeros((n_k, horizon + 1), dtype=np.int64)
    k_floor = np.zeros((n_k, horizon + 1), dtype=np.float64)
    k_known = np.zeros((n_k, horizon + 1), dtype=np.int64)
    for k, c in enumerate(instance.clusters):
        for aid in c.members:
            member[k, instance.sets.aircraft_pos[aid]] = 1
        k_cap[k, 1:] = c.maint_cap
        k_floor[k, 1:] = c.sustain_floor
        k_known[k, 1:] = c.known_in_maint

    if n_j:
        usage_ub = float(m_hours.max())
    else:
        usage_ub = max(p.default_usage, 0.0)

    return GridProblem(
        horizon=horizon,
        n_aircraft=n_i,
        n_missions=n_j,
        n_clusters=n_k,
        check_duration=p.check_duration,
        calendar_min=p.calendar_min,
        calendar_max=p.calendar_max,
        capacity=p.capacity,
        flight_max=p.flight_max,
        default_usage=p.default_usage,
        usage_ub=usage_ub,
        known_in_maint=known,
        m_start=m_start,
        m_end=m_end,
        m_hours=m_hours,
        m_req=m_req,
        m_minasg=m_minasg,
        eligible=eligible,
        nm=nm,
        rft0=rft0,
        barred_until=barred,
        forced_lo=forced_lo,
        forced_hi=forced_hi,
        pre_mission=pre_mission,
        pre_until=pre_until,
        member=member,
        k_cap=k_cap,
        k_floor=k_floor,
        k_known=k_known,
        tm_guard=horizon - p.calendar_max - p.check_duration,
    )


def grid_arrays(instance: Instance, solution: Solution) -> tuple[np.ndarray, np.ndarray]:
    """Solution grid as (mission_of, start) arrays, column 0 unused."""
    horizon = instance.horizon
    n_i = len(instance.fleet)
    mission_of = np.full((n_i, horizon + 1), -1, dtype=np.int64)
    start = np.zeros((n_i, horizon + 1), dtype=np.uint8)
    pos = instance.sets.mission_pos
    for i in range(n_i):
        row = solution.grid[i]
        for t in range(1, horizon + 1):
            cell = row[t]
            if cell == CHECK_START:
                start[i, t] = 1
            elif cell != FREE and cell != CHECK_BODY:
                mission_of[i, t] = pos[cell]
    return mission_of, start


def solution_from_arrays(
    instance: Instance, mission_of: np.ndarray, start: np.ndarray
) -> Solution:
    """Inverse of grid_arrays; materializes check bodies and in-shop prefixes."""
    horizon = instance.horizon
    m = instance.params.check_duration
    grid = []
    for i, a in enumerate(instance.fleet):
        row = [FREE] * (horizon + 1)
        for t in range(1, min(a.in_maint_remaining, horizon) + 1):
            row[t] = CHECK_BODY
        for t in range(1, horizon + 1):
            if start[i, t]:
                row[t] = CHECK_START
                for tb in range(t + 1, min(t + m - 1, horizon) + 1):
                    if row[tb] == FREE:
                        row[tb] = CHECK_BODY
        for t in range(1, horizon + 1):
            j = int(mission_of[i, t])
            if j >= 0:
                if start[i, t]:
                    raise ValueError(
                        f"aircraft {a.id}, period {t}: mission and check start collide"
                    )
                row[t] = instance.missions[j].id
        grid.append(row)
    return Solution(grid=grid)
