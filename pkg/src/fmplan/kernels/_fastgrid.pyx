# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled grid evaluation kernel.

Loop-for-loop port of kernels/pure.py; the dispatch wrapper keeps both
behind one signature and the test suite asserts identical output.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double TOL = 1e-6

FAM_INITIAL = 0
FAM_CAPACITY = 1
FAM_MISSION_REQ = 2
FAM_STATE = 3
FAM_MIN_ASSIGN = 4
FAM_CLUSTER_SERV = 5
FAM_CLUSTER_SUST = 6
FAM_FLIGHT_TIME = 7
FAM_RFT = 8
FAM_CALENDAR = 9


cdef inline cnp.int64_t _starts_in(cnp.int64_t[:, :] ps, Py_ssize_t i,
                                   Py_ssize_t lo, Py_ssize_t hi,
                                   Py_ssize_t T) noexcept:
    if hi < lo:
        return 0
    if hi > T:
        hi = T
    if hi < 1:
        return 0
    if lo < 1:
        lo = 1
    return ps[i, hi] - ps[i, lo - 1]


def evaluate_grid(int T, int n_i, int n_j, int n_k, int M, int E_m, int E_M,
                  long capacity, double flight_max, double default_usage,
                  double usage_ub,
                  cnp.int64_t[:] known, cnp.int64_t[:] m_start, cnp.int64_t[:] m_end,
                  cnp.float64_t[:] m_hours, cnp.int64_t[:] m_req, cnp.int64_t[:] m_minasg,
                  cnp.int64_t[:] nm, cnp.float64_t[:] rft0, cnp.int64_t[:] barred,
                  cnp.int64_t[:] forced_lo, cnp.int64_t[:] forced_hi,
                  cnp.int64_t[:] pre_mission, cnp.int64_t[:] pre_until,
                  cnp.uint8_t[:, :] member, cnp.int64_t[:, :] k_cap,
                  cnp.float64_t[:, :] k_floor, cnp.int64_t[:, :] k_known,
                  long tm_guard,
                  cnp.int64_t[:, :] mission_of, cnp.uint8_t[:, :] start):
    cdef Py_ssize_t i, t, j, k, s
    cdef Py_ssize_t n_starts, lo_t, hi_t, a_flag, lo, hi, prefix
    cdef cnp.int64_t busy, cnt, excess, deficit, load, prev, mt, jj
    cdef double hours, total, short
    cdef long span

    ps_arr = np.zeros((n_i, T + 1), dtype=np.int64)
    cdef cnp.int64_t[:, :] ps = ps_arr
    for i in range(n_i):
        for t in range(1, T + 1):
            ps[i, t] = ps[i, t - 1] + start[i, t]

    u_arr = np.zeros((n_i, T + 1), dtype=np.float64)
    rft_arr = np.zeros((n_i, T + 1), dtype=np.float64)
    cdef cnp.float64_t[:, :] u = u_arr
    cdef cnp.float64_t[:, :] rft = rft_arr

    cdef double credit
    for i in range(n_i):
        rft[i, 0] = rft0[i]
        for t in range(1, T + 1):
            cnt = _starts_in(ps, i, t - M + 1, t, T)
            jj = mission_of[i, t]
            hours = m_hours[jj] if jj >= 0 else 0.0
            if cnt == 0 and t > nm[i] and default_usage > hours:
                hours = default_usage
            u[i, t] = hours
            credit = flight_max if start[i, t] else 0.0
            rft[i, t] = rft[i, t - 1] + credit - hours
            if rft[i, t] > flight_max:
                rft[i, t] = flight_max

    viols = []

    for i in range(n_i):
        prefix = nm[i] if nm[i] < T else T
        for t in range(1, prefix + 1):
            if start[i, t]:
                viols.append((FAM_INITIAL, i, -1, t, 1.0))
            if mission_of[i, t] >= 0:
                viols.append((FAM_INITIAL, i, int(mission_of[i, t]), t, 1.0))
        jj = pre_mission[i]
        if jj >= 0:
            prefix = pre_until[i] if pre_until[i] < T else T
            for t in range(1, prefix + 1):
                if mission_of[i, t] != jj:
                    viols.append((FAM_INITIAL, i, int(jj), t, 1.0))

    for t in range(1, T + 1):
        busy = 0
        for i in range(n_i):
            busy += _starts_in(ps, i, t - M + 1, t, T)
        excess = busy + known[t] - capacity
        if excess > 0:
            viols.append((FAM_CAPACITY, -1, -1, t, float(excess)))

    cover_arr = np.zeros((n_j if n_j else 1, T + 1), dtype=np.int64)
    cdef cnp.int64_t[:, :] cover = cover_arr
    if n_j:
        for i in range(n_i):
            for t in range(1, T + 1):
                jj = mission_of[i, t]
                if jj >= 0:
                    cover[jj, t] += 1
        for j in range(n_j):
            for t in range(m_start[j], m_end[j] + 1):
                deficit = m_req[j] - cover[j, t]
                if deficit > 0:
                    viols.append((FAM_MISSION_REQ, -1, j, t, float(deficit)))

    for i in range(n_i):
        for t in range(1, T + 1):
            load = _starts_in(ps, i, t - M + 1, t, T)
            if mission_of[i, t] >= 0:
                load += 1
            if load > 1:
                viols.append((FAM_STATE, i, -1, t, float(load - 1)))

    # Minimum consecutive assignment via derived fresh-run starts.
    starts_scratch = np.zeros(T + 2, dtype=np.int64)
    cdef cnp.int64_t[:] sc = starts_scratch
    for i in range(n_i):
        for j in range(n_j):
            n_starts = 0
            prev = -1
            for t in range(1, T + 1):
                jj = mission_of[i, t]
                if jj == j and prev != j:
                    if not (t == 1 and pre_mission[i] == j):
                        sc[n_starts] = t
                        n_starts += 1
                prev = jj
            if n_starts == 0:
                continue
            mt = m_minasg[j]
            lo_t = sc[0]
            hi_t = sc[n_starts - 1] + mt
            if hi_t > m_end[j]:
                hi_t = m_end[j]
            for t in range(lo_t, hi_t + 1):
                cnt = 0
                for s in range(n_starts):
                    if t - mt <= sc[s] <= t:
                        cnt += 1
                a_flag = 1 if mission_of[i, t] == j else 0
                if cnt > a_flag:
                    viols.append((FAM_MIN_ASSIGN, i, j, t, float(cnt - a_flag)))

    for k in range(n_k):
        for t in range(1, T + 1):
            busy = 0
            total = 0.0
            for i in range(n_i):
                if member[k, i]:
                    busy += _starts_in(ps, i, t - M + 1, t, T)
                    total += rft[i, t]
            excess = busy + k_known[k, t] - k_cap[k, t]
            if excess > 0:
                viols.append((FAM_CLUSTER_SERV, -1, k, t, float(excess)))
            short = k_floor[k, t] - total
            if short > TOL:
                viols.append((FAM_CLUSTER_SUST, -1, k, t, short))

    for i in range(n_i):
        for t in range(1, T + 1):
            if u[i, t] > usage_ub + TOL:
                viols.append((FAM_FLIGHT_TIME, i, -1, t, u[i, t] - usage_ub))
            if rft[i, t] < -TOL:
                viols.append((FAM_RFT, i, -1, t, -rft[i, t]))
            elif rft[i, t] > flight_max + TOL:
                viols.append((FAM_RFT, i, -1, t, rft[i, t] - flight_max))

    span = M + E_m - 1
    for i in range(n_i):
        for t in range(1, T + 1):
            cnt = _starts_in(ps, i, t, t + span, T)
            if cnt > 1:
                viols.append((FAM_CALENDAR, i, -1, t, float(cnt - 1)))
        for t in range(1, T + 1):
            if not start[i, t]:
                continue
            lo = t + M + E_m - 1
            hi = t + M + E_M - 1
            if hi > tm_guard:
                hi = tm_guard
            if hi > T:
                hi = T
            if lo < 1:
                lo = 1
            if hi < lo:
                continue
            if _starts_in(ps, i, lo, hi, T) < 1:
                viols.append((FAM_CALENDAR, i, -1, t, 1.0))
        prefix = barred[i] if barred[i] < T else T
        for t in range(1, prefix + 1):
            if start[i, t]:
                viols.append((FAM_CALENDAR, i, -1, t, 1.0))
        if forced_hi[i] >= forced_lo[i]:
            if _starts_in(ps, i, forced_lo[i], forced_hi[i], T) < 1:
                viols.append((FAM_CALENDAR, i, -1, int(forced_hi[i]), 1.0))

    return u_arr, rft_arr, viols
