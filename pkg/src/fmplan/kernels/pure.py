"""Pure-Python grid evaluation kernel (reference semantics).

Given a packed problem and a grid, derives the usage/flight-time ledgers and
collects one record per violated constraint instance.  The compiled kernel
in ``_fastgrid.pyx`` implements exactly the same loops; equivalence between
the two is property-tested.

Violation records are ``(family, aircraft, other, period, magnitude)`` with
positional indices and -1 for fields that do not apply.  ``other`` is a
mission index for mission-related families and a cluster index for cluster
families.
"""

from __future__ import annotations

import numpy as np

TOL = 1e-6

FAM_INITIAL = 0  # violated fixed initial conditions
FAM_CAPACITY = 1  # fleet-wide simultaneous-check ceiling
FAM_MISSION_REQ = 2  # mission aircraft requirement
FAM_STATE = 3  # one activity per aircraft-period
FAM_MIN_ASSIGN = 4  # minimum consecutive assignment
FAM_CLUSTER_SERV = 5  # cluster serviceability ceiling
FAM_CLUSTER_SUST = 6  # cluster sustainability floor
FAM_FLIGHT_TIME = 7  # per-period usage bound
FAM_RFT = 8  # remaining-flight-time bounds
FAM_CALENDAR = 9  # check spacing and forced checks

FAMILY_NAMES = {
    FAM_INITIAL: "InitialFix",
    FAM_CAPACITY: "Capacity",
    FAM_MISSION_REQ: "MissionReq",
    FAM_STATE: "State",
    FAM_MIN_ASSIGN: "MinAssign",
    FAM_CLUSTER_SERV: "ClusterServ",
    FAM_CLUSTER_SUST: "ClusterSust",
    FAM_FLIGHT_TIME: "FlightTime",
    FAM_RFT: "Rft",
    FAM_CALENDAR: "Calendar",
}


def evaluate_grid(prob, mission_of, start):
    """Derive ledgers and violations for one grid.

    Returns ``(u, rft, violations)`` where ``u`` is float64[n_i, T+1]
    (column 0 zero), ``rft`` is float64[n_i, T+1] with column 0 holding the
    initial values, and ``violations`` is a list of record tuples.
    """
    T = prob.horizon
    n_i = prob.n_aircraft
    n_j = prob.n_missions
    M = prob.check_duration

    # Prefix sums of check starts: ps[i][t] = starts in periods 1..t, so the
    # count inside any inclusive window [lo, hi] is ps[hi] - ps[lo - 1].
    ps = [[0] * (T + 1) for _ in range(n_i)]
    for i in range(n_i):
        row = ps[i]
        srow = start[i]
        for t in range(1, T + 1):
            row[t] = row[t - 1] + int(srow[t])

    def starts_in(i, lo, hi):
        if hi < lo:
            return 0
        return ps[i][min(hi, T)] - ps[i][max(lo, 1) - 1]

    # Ledgers.  An aircraft is in the shop at t when a started check still
    # covers t or when t lies in its known initial in-shop prefix.  The
    # flight-time recurrence is taken at its pointwise maximum: each start
    # credits a full budget, capped at flight_max, which pins the ledger to
    # flight_max across the whole check.
    u = np.zeros((n_i, T + 1), dtype=np.float64)
    rft = np.zeros((n_i, T + 1), dtype=np.float64)
    for i in range(n_i):
        rft[i, 0] = prob.rft0[i]
        for t in range(1, T + 1):
            covered = starts_in(i, t - M + 1, t) > 0
            j = mission_of[i, t]
            hours = prob.m_hours[j] if j >= 0 else 0.0
            if not covered and t > prob.nm[i]:
                hours = max(hours, prob.default_usage)
            u[i, t] = hours
            credit = prob.flight_max if start[i, t] else 0.0
            rft[i, t] = min(rft[i, t - 1] + credit - u[i, t], prob.flight_max)

    viols = []

    # Fixed initial conditions: no activity during the known in-shop prefix,
    # pinned continuation of pre-horizon assignments.
    for i in range(n_i):
        for t in range(1, min(prob.nm[i], T) + 1):
            if start[i, t]:
                viols.append((FAM_INITIAL, i, -1, t, 1.0))
            if mission_of[i, t] >= 0:
                viols.append((FAM_INITIAL, i, int(mission_of[i, t]), t, 1.0))
        j = prob.pre_mission[i]
        if j >= 0:
            for t in range(1, min(prob.pre_until[i], T) + 1):
                if mission_of[i, t] != j:
                    viols.append((FAM_INITIAL, i, int(j), t, 1.0))

    # Fleet-wide check capacity per period.
    for t in range(1, T + 1):
        busy = sum(starts_in(i, t - M + 1, t) for i in range(n_i))
        excess = busy + prob.known_in_maint[t] - prob.capacity
        if excess > 0:
            viols.append((FAM_CAPACITY, -1, -1, t, float(excess)))

    # Mission aircraft requirements (deficits only; over-assignment is legal).
    if n_j:
        cover = np.zeros((n_j, T + 1), dtype=np.int64)
        for i in range(n_i):
            for t in range(1, T + 1):
                j = mission_of[i, t]
                if j >= 0:
                    cover[j, t] += 1
        for j in range(n_j):
            for t in range(prob.m_start[j], prob.m_end[j] + 1):
                deficit = prob.m_req[j] - cover[j, t]
                if deficit > 0:
                    viols.append((FAM_MISSION_REQ, -1, j, t, float(deficit)))

    # One activity per aircraft-period.
    for i in range(n_i):
        for t in range(1, T + 1):
            load = starts_in(i, t - M + 1, t) + (1 if mission_of[i, t] >= 0 else 0)
            if load > 1:
                viols.append((FAM_STATE, i, -1, t, float(load - 1)))

    # Minimum consecutive assignment: a fresh start to mission j at t0 pins
    # the assignment through t0 + MT_j, clipped to the mission window.  A
    # run continuing a pre-horizon assignment does not count as a start.
    for i in range(n_i):
        for j in range(n_j):
            starts = []
            prev = -1
            for t in range(1, T + 1):
                jj = mission_of[i, t]
                if jj == j and prev != j:
                    if not (t == 1 and prob.pre_mission[i] == j):
                        starts.append(t)
                prev = jj
            if not starts:
                continue
            mt = prob.m_minasg[j]
            lo_t = starts[0]
            hi_t = min(starts[-1] + mt, prob.m_end[j])
            for t in range(lo_t, hi_t + 1):
                cnt = sum(1 for s in starts if t - mt <= s <= t)
                assigned = 1 if mission_of[i, t] == j else 0
                if cnt > assigned:
                    viols.append((FAM_MIN_ASSIGN, i, int(j), t, float(cnt - assigned)))

    # Cluster serviceability and sustainability.
    for k in range(prob.n_clusters):
        members = [i for i in range(n_i) if prob.member[k, i]]
        for t in range(1, T + 1):
            busy = sum(starts_in(i, t - M + 1, t) for i in members)
            excess = busy + prob.k_known[k, t] - prob.k_cap[k, t]
            if excess > 0:
                viols.append((FAM_CLUSTER_SERV, -1, k, t, float(excess)))
            total = sum(rft[i, t] for i in members)
            short = prob.k_floor[k, t] - total
            if short > TOL:
                viols.append((FAM_CLUSTER_SUST, -1, k, t, float(short)))

    # Usage and remaining-flight-time bounds.
    for i in range(n_i):
        for t in range(1, T + 1):
            if u[i, t] > prob.usage_ub + TOL:
                viols.append((FAM_FLIGHT_TIME, i, -1, t, float(u[i, t] - prob.usage_ub)))
            if rft[i, t] < -TOL:
                viols.append((FAM_RFT, i, -1, t, float(-rft[i, t])))
            elif rft[i, t] > prob.flight_max + TOL:
                viols.append((FAM_RFT, i, -1, t, float(rft[i, t] - prob.flight_max)))

    # Calendar spacing: at most one start per no-restart window, a forced
    # successor start for early checks, and the initial-state windows.
    span = M + prob.calendar_min - 1
    for i in range(n_i):
        for t in range(1, T + 1):
            cnt = starts_in(i, t, t + span)
            if cnt > 1:
                viols.append((FAM_CALENDAR, i, -1, t, float(cnt - 1)))
        for t in range(1, T + 1):
            if not start[i, t]:
                continue
            lo = max(1, t + M + prob.calendar_min - 1)
            hi = min(t + M + prob.calendar_max - 1, prob.tm_guard, T)
            if hi < lo:
                continue
            if starts_in(i, lo, hi) < 1:
                viols.append((FAM_CALENDAR, i, -1, t, 1.0))
        for t in range(1, min(prob.barred_until[i], T) + 1):
            if start[i, t]:
                viols.append((FAM_CALENDAR, i, -1, t, 1.0))
        if prob.forced_hi[i] >= prob.forced_lo[i]:
            if starts_in(i, prob.forced_lo[i], prob.forced_hi[i]) < 1:
                viols.append((FAM_CALENDAR, i, -1, int(prob.forced_hi[i]), 1.0))

    return u, rft, viols
