"""Feasibility-seeking simulated annealing with release/repair moves.

Moves are generated from the locations of the current violations, one is
chosen uniformly at random, and each move releases some structural blocks
(whole checks, whole mission runs) and greedily repairs around them.  Hard
structure always holds by construction: checks stay atomic, per-cell
occupancy stays single, cells pinned by the initial state are never
touched.  Everything else is penalized.

The energy is a weighted violation sum with an infeasibility offset so any
feasible solution scores below any infeasible one; on a feasible solution
the penalty is exactly the scaled objective.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import Instance, Solution
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
)
from .validate import OBJ_CHECKS, OBJ_CHECKS_RFT, check_solution, derive_usage

__all__ = ["SaParams", "SearchTrace", "sa_solve", "penalty", "accept"]

VIOLATION_BASE = 1000.0
VIOLATION_WEIGHT = 10.0
OBJECTIVE_SCALE = 1e-3
_HOUR_FAMILIES = (FAM_CLUSTER_SUST, FAM_FLIGHT_TIME, FAM_RFT)


@dataclass(frozen=True)
class SaParams:
    time_limit: float = 600.0
    iter_limit: int = 100_000
    initial_temperature: float | None = None  # None: calibrated from samples
    cooling_rate: float = 0.999
    release_fraction: float = 0.3
    stop_on_feasible: bool = True
    objective: str = OBJ_CHECKS
    seed: int = 0
    debug: bool = False  # assert structural invariants after every move

    def __post_init__(self):
        if not 0 < self.cooling_rate < 1:
            raise ValueError("cooling_rate must lie in (0, 1)")
        if self.time_limit <= 0 or self.iter_limit <= 0:
            raise ValueError("time and iteration limits must be positive")
        if not 0 < self.release_fraction <= 1:
            raise ValueError("release_fraction must lie in (0, 1]")


@dataclass
class SearchTrace:
    iterations: int = 0
    best_penalty: list[float] = field(default_factory=list)
    wall_time: float = 0.0
    outcome: str = "IterLimit"  # Feasible | TimeLimit | IterLimit


def accept(delta_penalty: float, temperature: float, rng: np.random.Generator) -> bool:
    """Metropolis rule; non-worsening moves always pass."""
    if delta_penalty <= 0:
        return True
    if temperature <= 0:
        return False
    return rng.random() < math.exp(-delta_penalty / temperature)


def _weighted(records, flight_max: float) -> float:
    total = 0.0
    scale = max(flight_max, 1.0)
    for fam, _i, _o, _t, mag in records:
        total += mag / scale if fam in _HOUR_FAMILIES else mag
    return total


def _penalty_of(records, n_checks: int, rft_end_sum: float, instance, kind) -> float:
    if kind == OBJ_CHECKS_RFT:
        obj = n_checks * instance.params.flight_max - rft_end_sum
    else:
        obj = float(n_checks)
    if not records:
        return OBJECTIVE_SCALE * obj
    return (
        VIOLATION_BASE
        + VIOLATION_WEIGHT * _weighted(records, instance.params.flight_max)
        + OBJECTIVE_SCALE * obj
    )


def penalty(instance: Instance, solution: Solution, kind: str = OBJ_CHECKS) -> float:
    """Energy of a solution: scaled objective once feasible, else offset
    plus the weighted violation magnitudes (hour-valued families are
    normalized by the flight-hour budget)."""
    prob = kernels.pack_instance(instance)
    mission_of, start = kernels.grid_arrays(instance, solution)
    _u, rft, records = kernels.evaluate_grid(prob, mission_of, start)
    n_checks = int(start[:, 1:].sum())
    return _penalty_of(records, n_checks, float(rft[:, -1].sum()), instance, kind)


class _State:
    """Mutable working state shared by the construction and the moves."""

    def __init__(self, instance: Instance, rng: np.random.Generator, release_fraction: float = 0.3):
        self.instance = instance
        self.prob = kernels.pack_instance(instance)
        self.rng = rng
        self.release_fraction = release_fraction
        n_i = len(instance.fleet)
        horizon = instance.horizon
        self.mission_of = np.full((n_i, horizon + 1), -1, dtype=np.int64)
        self.start = np.zeros((n_i, horizon + 1), dtype=np.uint8)
        self.horizon = horizon
        self.n_i = n_i
        self.last_rft = np.zeros((n_i, horizon + 1), dtype=np.float64)

    # -- structural helpers -------------------------------------------------

    def fixed_until(self, i: int) -> int:
        """Last period pinned by the initial state for aircraft i."""
        return int(max(self.prob.nm[i], self.prob.pre_until[i]))

    def own_check_span(self, i: int, t: int) -> tuple[int, int] | None:
        m = self.prob.check_duration
        for t0 in range(max(1, t - m + 1), t + 1):
            if t0 <= self.horizon and self.start[i, t0]:
                return t0, min(t0 + m - 1, self.horizon)
        if t <= self.prob.nm[i]:
            return 1, int(self.prob.nm[i])
        return None

    def cell_free(self, i: int, t: int) -> bool:
        return (
            self.mission_of[i, t] < 0
            and self.own_check_span(i, t) is None
            and t > self.fixed_until(i)
        )

    def run_bounds(self, i: int, t: int) -> tuple[int, int, int] | None:
        j = int(self.mission_of[i, t])
        if j < 0:
            return None
        a = t
        while a > 1 and self.mission_of[i, a - 1] == j:
            a -= 1
        b = t
        while b < self.horizon and self.mission_of[i, b + 1] == j:
            b += 1
        return j, a, b

    def release_run(self, i: int, t: int) -> list[tuple[int, int]]:
        """Free the whole mission run covering (i, t), keeping pinned cells.

        Returns the (mission, period) cells released, empty when nothing
        could be released.
        """
        bounds = self.run_bounds(i, t)
        if bounds is None:
            return []
        j, a, b = bounds
        a = max(a, self.fixed_until(i) + 1)
        if a > b:
            return []
        self.mission_of[i, a : b + 1] = -1
        return [(j, tt) for tt in range(a, b + 1)]

    def release_check(self, i: int, t: int) -> bool:
        span = self.own_check_span(i, t)
        if span is None or not self.start[i, span[0]]:
            return False  # the known initial stay has no start to release
        self.start[i, span[0]] = 0
        return True

    def occupancy(self, t: int) -> int:
        m = self.prob.check_duration
        lo = max(1, t - m + 1)
        count = int(self.start[:, lo : t + 1].sum()) if m > 0 else 0
        return count + int(self.prob.known_in_maint[t]) if t <= self.horizon else count

    def legal_check_periods(self, i: int, lo: int = 1, hi: int | None = None) -> list[int]:
        """Start periods honoring the initial no-start window, pinned cells,
        and spacing against the aircraft's other checks."""
        hi = self.horizon if hi is None else min(hi, self.horizon)
        span = self.prob.check_duration + self.prob.calendar_min - 1
        own = [t for t in range(1, self.horizon + 1) if self.start[i, t]]
        out = []
        lo = max(lo, int(self.prob.barred_until[i]) + 1, self.fixed_until(i) + 1)
        for t in range(lo, hi + 1):
            if any(abs(t - s) <= span for s in own):
                continue
            out.append(t)
        return out

    def make_room(self, t0: int, protect: int) -> None:
        """Relocate other aircraft's checks away from the capacity window a
        start at t0 would occupy; best effort, at most two relocations."""
        m = self.prob.check_duration
        moved = 0
        for t in range(t0, min(t0 + m - 1, self.horizon) + 1):
            if moved >= 2 or self.occupancy(t) < self.prob.capacity:
                continue
            lo = max(1, t - m + 1)
            offenders = [
                (ii, s)
                for ii in range(self.n_i)
                for s in range(lo, min(t, self.horizon) + 1)
                if ii != protect and self.start[ii, s]
            ]
            self.rng.shuffle(offenders)
            for ii, s in offenders:
                self.start[ii, s] = 0
                spots = [
                    sp
                    for sp in self.legal_check_periods(ii)
                    if (sp + m - 1 < t0 or sp > t0 + m - 1)
                    and self.occupancy(sp) < self.prob.capacity
                ]
                if spots:
                    released = self.place_check(ii, int(spots[int(self.rng.integers(0, len(spots)))]))
                    _recover_released(self, released, exclude=ii)
                    moved += 1
                    break
                self.start[ii, s] = 1

    def place_check(self, i: int, t0: int) -> list[tuple[int, int]]:
        """Start a check, releasing any mission runs it would sit on.

        Returns the mission cells vacated so callers can repair coverage.
        """
        m = self.prob.check_duration
        released = []
        for t in range(t0, min(t0 + m - 1, self.horizon) + 1):
            if self.mission_of[i, t] >= 0:
                released.extend(self.release_run(i, t))
        self.start[i, t0] = 1
        return released

    def place_run(self, i: int, j: int, lo: int, hi: int, displace: bool) -> bool:
        """Assign mission j over [lo, hi] clipped to free cells.

        The placed fragment must satisfy the consecutive-assignment window
        (reach lo + MT or the mission end); otherwise nothing is placed.
        With ``displace`` other mission runs in the way are released first
        (checks never are).
        """
        prob = self.prob
        m_end = int(prob.m_end[j])
        lo = max(lo, int(prob.m_start[j]), self.fixed_until(i) + 1)
        hi = min(hi, m_end)
        if lo > hi:
            return False
        if displace:
            for t in range(lo, hi + 1):
                if self.mission_of[i, t] >= 0 and self.mission_of[i, t] != j:
                    self.release_run(i, t)
        # Clip to the free stretch around lo.
        a = lo
        b = lo
        while b + 1 <= hi and self.cell_free(i, b + 1):
            b += 1
        if not self.cell_free(i, a):
            return False
        # Merge with an adjacent earlier run of the same mission.
        merged_start = a
        if a - 1 >= 1 and self.mission_of[i, a - 1] == j:
            bounds = self.run_bounds(i, a - 1)
            merged_start = bounds[1]
        need_end = min(merged_start + int(prob.m_minasg[j]), m_end)
        if b < need_end:
            return False
        self.mission_of[i, a : b + 1] = j
        return True

    # -- evaluation ----------------------------------------------------------

    def evaluate(self):
        u, rft, records = kernels.evaluate_grid(self.prob, self.mission_of, self.start)
        self.last_rft = rft
        return u, rft, records

    def snapshot(self) -> tuple[np.ndarray, np.ndarray]:
        return self.mission_of.copy(), self.start.copy()

    def restore(self, snap: tuple[np.ndarray, np.ndarray]) -> None:
        self.mission_of[:, :] = snap[0]
        self.start[:, :] = snap[1]


def _construct_initial(state: _State) -> None:
    """Greedy start: forced checks earliest-deadline-first under capacity,
    pinned continuations, then coverage-driven mission assignment."""
    instance = state.instance
    prob = state.prob
    horizon = state.horizon
    rng = state.rng

    for i in range(state.n_i):
        j = int(prob.pre_mission[i])
        if j >= 0 and prob.pre_until[i] >= 1:
            state.mission_of[i, 1 : int(prob.pre_until[i]) + 1] = j

    forced = [
        i
        for i in range(state.n_i)
        if prob.forced_hi[i] >= prob.forced_lo[i]
    ]
    forced.sort(key=lambda i: (int(prob.forced_hi[i]), int(prob.rft0[i])))
    for i in forced:
        candidates = state.legal_check_periods(i, 1, int(prob.forced_hi[i]))
        m = prob.check_duration
        open_slots = []
        for t0 in candidates:
            body = range(t0, min(t0 + m - 1, horizon) + 1)
            if all(state.occupancy(t) < prob.capacity for t in body) and all(
                state.mission_of[i, t] < 0 for t in body
            ):
                open_slots.append(t0)
        if open_slots:
            # Mild jitter over the earliest open slots diversifies restarts.
            pool = open_slots[: max(1, min(3, len(open_slots)))]
            pick = pool[0] if rng.random() < 0.6 else pool[int(rng.integers(0, len(pool)))]
            state.place_check(i, int(pick))
        elif candidates:
            state.place_check(i, candidates[-1])

    cover = np.zeros((len(instance.missions), horizon + 1), dtype=np.int64)
    for i in range(state.n_i):
        for t in range(1, horizon + 1):
            if state.mission_of[i, t] >= 0:
                cover[state.mission_of[i, t], t] += 1

    for j, mission in enumerate(instance.missions):
        guard = 0
        while guard < 4 * mission.required:
            guard += 1
            deficit_periods = [
                t for t in mission.window if cover[j, t] < mission.required
            ]
            if not deficit_periods:
                break
            t_first = deficit_periods[0]
            best = None
            for i in instance.sets.eligible[j]:
                if not state.cell_free(i, t_first):
                    continue
                b = t_first
                while b + 1 <= mission.end and state.cell_free(i, b + 1):
                    b += 1
                a = t_first
                while a - 1 >= mission.start and state.cell_free(i, a - 1):
                    a -= 1
                if a - 1 >= 1 and state.mission_of[i, a - 1] == j:
                    pass  # merging handled by place_run
                score = b - a
                if best is None or score > best[0]:
                    best = (score, i, a, b)
            if best is None:
                break
            _score, i, a, b = best
            if not state.place_run(i, j, a, b, displace=False):
                break
            cover[j, :] = 0
            for ii in instance.sets.eligible[j]:
                for t in mission.window:
                    if state.mission_of[ii, t] == j:
                        cover[j, t] += 1


def _candidate_moves(state: _State, records) -> list[tuple]:
    """One symbolic move per violation locus; resolved with randomness later."""
    moves = []
    for fam, i, other, t, _mag in records:
        if fam == FAM_MISSION_REQ:
            moves.append(("cover", other, t))
        elif fam in (FAM_CAPACITY, FAM_CLUSTER_SERV):
            moves.append(("shift_check", other if fam == FAM_CLUSTER_SERV else -1, t))
        elif fam == FAM_MIN_ASSIGN:
            moves.append(("fix_run", i, other, t))
        elif fam == FAM_CLUSTER_SUST:
            moves.append(("boost_cluster", other, t))
        elif fam == FAM_RFT:
            moves.append(("boost_aircraft", i, t))
        elif fam == FAM_CALENDAR:
            moves.append(("recheck", i, t))
        elif fam in (FAM_STATE, FAM_FLIGHT_TIME, FAM_INITIAL):
            moves.append(("clear", i, t))
    return moves


def _objective_moves(state: _State) -> list[tuple]:
    moves = []
    for i in range(state.n_i):
        for t in range(1, state.horizon + 1):
            if state.start[i, t]:
                moves.append(("drop_check", i, t))
    instance = state.instance
    for j, mission in enumerate(instance.missions):
        counts = [
            sum(
                1
                for i in instance.sets.eligible[j]
                if state.mission_of[i, t] == j
            )
            for t in mission.window
        ]
        if counts and min(counts) > mission.required:
            moves.append(("trim", j, mission.start))
    return moves


def _apply_move(state: _State, move: tuple) -> None:
    rng = state.rng
    prob = state.prob
    kind = move[0]
    if kind == "cover":
        _j, t = move[1], move[2]
        j = int(_j)
        mission = state.instance.missions[j]
        displace = rng.random() < state.release_fraction
        _cover_period(state, j, t, displace=displace)
    elif kind == "shift_check":
        k, t = move[1], move[2]
        m = prob.check_duration
        offenders = []
        for i in range(state.n_i):
            if k >= 0 and not prob.member[k, i]:
                continue
            for t0 in range(max(1, t - m + 1), t + 1):
                if state.start[i, t0]:
                    offenders.append((i, t0))
        if not offenders:
            return
        i, t0 = offenders[int(rng.integers(0, len(offenders)))]
        state.start[i, t0] = 0
        spots = state.legal_check_periods(i)
        if not spots:
            state.start[i, t0] = 1
            return
        quiet = [s for s in spots if state.occupancy(s) < prob.capacity]
        pool = quiet or spots
        released = state.place_check(i, int(pool[int(rng.integers(0, len(pool)))]))
        _recover_released(state, released, exclude=i)
    elif kind == "fix_run":
        i, j, t = int(move[1]), int(move[2]), move[3]
        mission = state.instance.missions[j]
        # Release the run whose fresh start trails period t, then rebuild a
        # stretch long enough for the minimum-assignment window.
        for tt in range(max(1, t - mission.min_assign), min(t, state.horizon) + 1):
            if state.mission_of[i, tt] == j:
                state.release_run(i, tt)
                break
        state.place_run(
            i, j, max(mission.start, t - mission.min_assign), mission.end, displace=False
        )
    elif kind == "boost_cluster":
        k, t = int(move[1]), move[2]
        members = [i for i in range(state.n_i) if prob.member[k, i]]
        if not members:
            return
        rft = state.last_rft
        members.sort(key=lambda i: rft[i, min(t, state.horizon)])
        _boost(state, members[0], t)
    elif kind == "boost_aircraft":
        _boost(state, int(move[1]), move[2])
    elif kind == "recheck":
        i, t = int(move[1]), move[2]
        span = prob.check_duration + prob.calendar_min - 1
        packed = [
            tt
            for tt in range(t, min(t + max(span, 0), state.horizon) + 1)
            if state.start[i, tt]
        ]
        if len(packed) > 1:
            # Two starts inside one no-restart window: relocate one of them.
            t0 = int(packed[int(rng.integers(0, len(packed)))])
            state.start[i, t0] = 0
            spots = state.legal_check_periods(i)
            if spots:
                quiet = [s for s in spots if state.occupancy(s) < prob.capacity]
                pool = quiet or spots
                released = state.place_check(i, int(pool[int(rng.integers(0, len(pool)))]))
                _recover_released(state, released, exclude=i)
            else:
                state.start[i, t0] = 1
        elif state.start[i, t]:
            # Barred start or a missed forced successor: move it, or add
            # the successor inside its window.
            lo = t + prob.check_duration + prob.calendar_min - 1
            hi = min(t + prob.check_duration + prob.calendar_max - 1, prob.tm_guard)
            successor = state.legal_check_periods(i, max(lo, 1), hi) if hi >= lo else []
            if successor and rng.random() < 0.5:
                quiet = [s for s in successor if state.occupancy(s) < prob.capacity]
                pool = quiet or successor
                released = state.place_check(i, int(pool[int(rng.integers(0, len(pool)))]))
                _recover_released(state, released, exclude=i)
                return
            state.start[i, t] = 0
            spots = state.legal_check_periods(i)
            if spots:
                quiet = [s for s in spots if state.occupancy(s) < prob.capacity]
                pool = quiet or spots
                released = state.place_check(i, int(pool[int(rng.integers(0, len(pool)))]))
                _recover_released(state, released, exclude=i)
            else:
                state.start[i, t] = 1
        else:
            # The initial forced window went unserved; insert inside it.  If
            # the aircraft's own checks block every window period by
            # spacing, relocate the nearest one into the window instead.
            lo, hi = int(prob.forced_lo[i]), int(prob.forced_hi[i])
            spots = state.legal_check_periods(i, lo, hi)
            if not spots:
                own = [tt for tt in range(1, state.horizon + 1) if state.start[i, tt]]
                if own:
                    blocker = min(own, key=lambda tt: abs(tt - hi))
                    state.start[i, blocker] = 0
                    spots = state.legal_check_periods(i, lo, hi)
                    if not spots:
                        state.start[i, blocker] = 1
            spots = spots or state.legal_check_periods(i, lo, hi)
            if spots:
                quiet = [s for s in spots if state.occupancy(s) < prob.capacity]
                pool = quiet or spots
                released = state.place_check(i, int(pool[int(rng.integers(0, len(pool)))]))
                _recover_released(state, released, exclude=i)
    elif kind == "clear":
        i, t = int(move[1]), move[2]
        if not state.release_run(i, t):
            state.release_check(i, t)
    elif kind == "drop_check":
        i, t = int(move[1]), move[2]
        state.start[i, t] = 0
    elif kind == "trim":
        j, _t = int(move[1]), move[2]
        mission = state.instance.missions[j]
        for i in state.instance.sets.eligible[j]:
            run_periods = [t for t in mission.window if state.mission_of[i, t] == j]
            if not run_periods:
                continue
            still_ok = all(
                sum(
                    1
                    for ii in state.instance.sets.eligible[j]
                    if state.mission_of[ii, t] == j
                )
                > mission.required
                for t in run_periods
            )
            if still_ok:
                state.release_run(i, run_periods[0])
                return


def _cover_period(state: _State, j: int, t: int, displace: bool, exclude: int = -1) -> bool:
    """Assign one more aircraft to mission j at period t.

    Candidates are ordered by remaining flight hours at t (from the last
    evaluation) with jitter among the healthier half.
    """
    rng = state.rng
    mission = state.instance.missions[j]
    candidates = [
        i
        for i in state.instance.sets.eligible[j]
        if state.mission_of[i, t] != j and i != exclude
    ]
    if not candidates:
        return False
    rft = state.last_rft
    candidates.sort(key=lambda i: -rft[i, min(t, state.horizon)])
    cut = max(1, len(candidates) // 2)
    pool = candidates[:cut]
    rng.shuffle(pool)
    candidates = pool + candidates[cut:]
    for i in candidates:
        lo = max(mission.start, t - int(rng.integers(0, mission.min_assign + 1)))
        if state.place_run(i, j, lo, mission.end, displace=displace):
            return True
        if state.place_run(i, j, t, mission.end, displace=displace):
            return True
    return False


def _recover_released(state: _State, released: list[tuple[int, int]], exclude: int) -> None:
    """Repair coverage for (mission, period) cells vacated by a release."""
    seen = set()
    for j, t in released:
        if (j, t) in seen:
            continue
        seen.add((j, t))
        covered = sum(
            1 for ii in state.instance.sets.eligible[j] if state.mission_of[ii, t] == j
        )
        if covered < state.instance.missions[j].required:
            _cover_period(state, j, t, displace=False, exclude=exclude)


def _assert_structure(state: _State) -> None:
    """Hard invariants every move must preserve: cell-level single occupancy
    and untouched initial-state pins."""
    assert not np.any((state.mission_of >= 0) & (state.start == 1)), "cell collision"
    prob = state.prob
    for i in range(state.n_i):
        nm = int(prob.nm[i])
        if nm:
            assert not state.start[i, 1 : nm + 1].any(), "start inside known check"
            assert (state.mission_of[i, 1 : nm + 1] < 0).all(), "mission inside known check"
        pre_j, pre_until = int(prob.pre_mission[i]), int(prob.pre_until[i])
        if pre_j >= 0 and pre_until >= 1:
            assert (
                state.mission_of[i, 1 : pre_until + 1] == pre_j
            ).all(), "pinned continuation released"


def _boost(state: _State, i: int, t: int) -> None:
    """Raise the flight-time ledger of aircraft i before period t: start a
    check (restores the budget) or shed a mission run, then repair the
    coverage holes the release opened with other aircraft."""
    spots = state.legal_check_periods(i, 1, t)
    prob = state.prob
    if spots:
        quiet = [s for s in spots if state.occupancy(s) < prob.capacity]
        if quiet:
            spot = int(quiet[int(state.rng.integers(0, len(quiet)))])
        else:
            # No free shop slot before the breach: push a neighbor aside.
            spot = int(spots[int(state.rng.integers(0, len(spots)))])
            state.make_room(spot, protect=i)
        released = state.place_check(i, spot)
        _recover_released(state, released, exclude=i)
        return
    runs = [tt for tt in range(1, t + 1) if state.mission_of[i, tt] >= 0]
    if runs:
        released = state.release_run(i, runs[int(state.rng.integers(0, len(runs)))])
        _recover_released(state, released, exclude=i)


_STALE_WINDOW = 1200  # iterations without improvement before a reheat
_REHEATS_PER_CHAIN = 4


def sa_solve(instance: Instance, params: SaParams) -> tuple[Solution, SearchTrace]:
    """Anneal from a greedy start; returns the best solution and its trace.

    The iteration budget is spent over independent restart chains, each
    with its own sub-seeded stream and a jittered greedy construction; a
    chain reheats when frozen and yields to the next chain after repeated
    reheats.  Stops on feasibility (when requested), the wall-clock limit,
    or the iteration limit, and always returns the best-penalty solution
    seen.  Identical inputs (seed included) give identical traces, wall
    time aside.
    """
    t_begin = time.monotonic()
    kind = params.objective
    trace = SearchTrace()

    best: float | None = None
    best_snap = None
    best_feasible = False
    iters_used = 0
    outcome = "IterLimit"
    stopped = False

    chain = 0
    while iters_used < params.iter_limit and not stopped:
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((params.seed, 17, chain)))
        )
        chain += 1
        state = _State(instance, rng, release_fraction=params.release_fraction)
        _construct_initial(state)

        def full_penalty():
            u, rft, records = state.evaluate()
            n_checks = int(state.start[:, 1:].sum())
            return records, _penalty_of(
                records, n_checks, float(rft[:, -1].sum()), instance, kind
            )

        records, current = full_penalty()
        if best is None or current < best - 1e-12:
            best = current
            best_snap = state.snapshot()
            best_feasible = not records
        if not records and params.stop_on_feasible:
            outcome = "Feasible"
            break

        temperature = params.initial_temperature
        if temperature is None:
            # Aim for ~80% initial acceptance over a sample of moves.
            deltas = []
            probe_snap = state.snapshot()
            for _ in range(100):
                moves = _candidate_moves(state, records) or _objective_moves(state)
                if not moves:
                    break
                _apply_move(state, moves[int(rng.integers(0, len(moves)))])
                _rec, cand = full_penalty()
                if cand > current:
                    deltas.append(cand - current)
                state.restore(probe_snap)
            temperature = (
                (sum(deltas) / len(deltas)) / math.log(1 / 0.8) if deltas else 1.0
            )
        chain_t0 = temperature

        stale = 0
        reheats = 0
        while iters_used < params.iter_limit:
            if not records and params.stop_on_feasible:
                outcome = "Feasible"
                stopped = True
                break
            if time.monotonic() - t_begin > params.time_limit:
                outcome = "TimeLimit"
                stopped = True
                break
            moves = _candidate_moves(state, records) or _objective_moves(state)
            if not moves:
                stopped = True
                break
            iters_used += 1
            trace.iterations = iters_used
            snap = state.snapshot()
            _apply_move(state, moves[int(rng.integers(0, len(moves)))])
            if params.debug:
                _assert_structure(state)
            new_records, candidate = full_penalty()
            if accept(candidate - current, temperature, rng):
                current = candidate
                records = new_records
                if candidate < best - 1e-12:
                    best = candidate
                    best_snap = state.snapshot()
                    best_feasible = not new_records
                    stale = 0
            else:
                state.restore(snap)
            stale += 1
            if stale >= _STALE_WINDOW:
                reheats += 1
                stale = 0
                if reheats > _REHEATS_PER_CHAIN:
                    break  # hand the remaining budget to a fresh chain
                # Gentle reheat: hot enough to hop over a few violation
                # units, not hot enough to fully randomize the schedule.
                temperature = max(3 * VIOLATION_WEIGHT, 0.1 * chain_t0)
            temperature *= params.cooling_rate
            trace.best_penalty.append(best)

    final = _State(instance, np.random.default_rng(0))
    final.restore(best_snap)
    solution = kernels.solution_from_arrays(instance, final.mission_of, final.start)
    derive_usage(instance, solution)
    trace.wall_time = time.monotonic() - t_begin
    trace.outcome = "Feasible" if best_feasible else outcome
    return solution, trace
