"""Domain types for long-horizon fleet flight and maintenance planning.

Periods are 1-based integers; period 0 is reserved for initial-state
bookkeeping (the flight-time ledger starts at ``rft[i][0]``).  All window
helpers return ``range`` objects over periods, inclusive of both endpoints
of the underlying interval; empty ranges are legal values everywhere and
are required for the degenerate zero-duration-check instances produced by
the interval-scheduling reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "FREE",
    "CHECK_START",
    "CHECK_BODY",
    "RESERVED_CELLS",
    "InstanceError",
    "SolutionError",
    "Params",
    "Mission",
    "Aircraft",
    "Cluster",
    "Instance",
    "IndexSets",
    "Solution",
    "window_sets",
    "occupancy_window",
    "no_restart_window",
    "forced_next_window",
    "initial_window_sets",
    "min_assign_window",
    "derive_index_sets",
]


class InstanceError(ValueError):
    """Raised for structurally invalid instance data."""


class SolutionError(ValueError):
    """Raised for structurally invalid solution data."""


# Grid cell tokens.  A cell holds one of these or a mission id; mission ids
# therefore may not collide with the reserved tokens.
FREE = ""
CHECK_START = "M*"
CHECK_BODY = "M"
RESERVED_CELLS = frozenset({FREE, CHECK_START, CHECK_BODY})


@dataclass(frozen=True)
class Params:
    """Global fleet parameters.

    ``in_maintenance`` is the known in-shop head count per period (index 0 =
    period 1); normally only the first ``check_duration - 1`` entries are
    nonzero but that shape is not enforced.
    """

    num_periods: int
    check_duration: int  # M, periods per check
    capacity: int  # C_max, simultaneous checks fleet-wide
    calendar_max: int  # E_M, periods of operation bought by one check
    calendar_min: int  # E_m, no-restart span after a check
    flight_max: float  # H_M, flight hours restored by one check
    default_usage: float  # U_min, hours burned per serviceable idle period
    in_maintenance: tuple[int, ...] = ()

    def __post_init__(self):
        if self.num_periods < 0:
            raise InstanceError("num_periods must be >= 0")
        if self.check_duration < 0:
            raise InstanceError("check_duration must be >= 0")
        if not 0 <= self.calendar_min <= self.calendar_max:
            raise InstanceError("need 0 <= calendar_min <= calendar_max")
        if self.flight_max < 0 or self.default_usage < 0 or self.capacity < 0:
            raise InstanceError("flight_max, default_usage, capacity must be >= 0")
        if len(self.in_maintenance) > self.num_periods:
            raise InstanceError("in_maintenance longer than horizon")
        for n in self.in_maintenance:
            if n < 0 or n > self.capacity:
                raise InstanceError("in_maintenance counts must lie in [0, capacity]")

    def known_in_maintenance(self, t: int) -> int:
        """N_t for any period, 0 outside the recorded prefix."""
        if 1 <= t <= len(self.in_maintenance):
            return self.in_maintenance[t - 1]
        return 0


@dataclass(frozen=True)
class Mission:
    """A scheduled mission occupying an inclusive period window."""

    id: str
    start: int
    end: int
    hours: float  # H_j, flight hours per assigned period
    required: int  # R_j, aircraft needed every active period
    min_assign: int  # MT_j, minimum consecutive-assignment parameter
    mtype: str
    standard: str | None = None

    def __post_init__(self):
        if self.id in RESERVED_CELLS:
            raise InstanceError(f"mission id {self.id!r} collides with a grid token")
        if self.start > self.end:
            raise InstanceError(f"mission {self.id}: empty active window")
        if self.hours < 0:
            raise InstanceError(f"mission {self.id}: hours must be >= 0")
        if self.required < 1:
            raise InstanceError(f"mission {self.id}: required must be >= 1")
        if not 1 <= self.min_assign <= self.duration:
            raise InstanceError(f"mission {self.id}: need 1 <= min_assign <= duration")

    @property
    def duration(self) -> int:
        return self.end - self.start + 1

    @property
    def window(self) -> range:
        """Active periods T_j."""
        return range(self.start, self.end + 1)


@dataclass(frozen=True)
class Aircraft:
    """One airframe with its initial state.

    ``in_maint_remaining`` (NM_i) > 0 means the aircraft entered a check
    before the horizon and stays in it through period NM_i.  For such
    aircraft ``rct_init``/``rft_init`` carry the post-check budgets; the
    effective calendar budget counted from period 0 is
    ``rct_init + in_maint_remaining``.
    """

    id: str
    atype: str
    standards: frozenset[str] = frozenset()
    rft_init: float = 0.0
    rct_init: int = 0
    in_maint_remaining: int = 0
    preassigned: tuple[str, int] | None = None  # (mission id, elapsed periods)

    def __post_init__(self):
        if self.rft_init < 0:
            raise InstanceError(f"aircraft {self.id}: rft_init must be >= 0")
        if self.rct_init < 0:
            raise InstanceError(f"aircraft {self.id}: rct_init must be >= 0")
        if self.in_maint_remaining < 0:
            raise InstanceError(f"aircraft {self.id}: in_maint_remaining must be >= 0")
        if self.in_maint_remaining > 0 and self.preassigned is not None:
            raise InstanceError(
                f"aircraft {self.id}: in-check aircraft cannot carry a preassignment"
            )
        if self.preassigned is not None and self.preassigned[1] < 0:
            raise InstanceError(f"aircraft {self.id}: negative preassignment elapsed")

    @property
    def rct_effective(self) -> int:
        return self.rct_init + self.in_maint_remaining


@dataclass(frozen=True)
class Cluster:
    """A group of interchangeable aircraft carrying per-period service floors.

    ``maint_cap`` is the ceiling on simultaneously in-check members (the
    complement of the serviceable-aircraft floor), ``sustain_floor`` the
    minimum summed remaining flight hours, ``known_in_maint`` the members
    already in the shop.  Each is indexed by period (entry 0 = period 1).
    """

    id: str
    members: tuple[str, ...]
    maint_cap: tuple[int, ...]
    sustain_floor: tuple[float, ...]
    known_in_maint: tuple[int, ...]

    def __post_init__(self):
        if not self.members:
            raise InstanceError(f"cluster {self.id}: members must be nonempty")
        if len(set(self.members)) != len(self.members):
            raise InstanceError(f"cluster {self.id}: duplicate members")


@dataclass(frozen=True)
class Instance:
    """A complete planning problem.

    Construction validates all structural invariants and materializes the
    derived index sets (available as ``.sets``).  Instances are immutable
    and safe to share across workers.
    """

    params: Params
    missions: tuple[Mission, ...]
    fleet: tuple[Aircraft, ...]
    clusters: tuple[Cluster, ...] = ()
    reduction_instance: bool = False
    sets: "IndexSets" = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        horizon = self.params.num_periods
        seen = set()
        for m in self.missions:
            if m.id in seen:
                raise InstanceError(f"duplicate mission id {m.id}")
            seen.add(m.id)
            if m.start < 1 or m.end > horizon:
                raise InstanceError(f"mission {m.id}: window outside [1, {horizon}]")
        seen = set()
        for a in self.fleet:
            if a.id in seen:
                raise InstanceError(f"duplicate aircraft id {a.id}")
            seen.add(a.id)
            if a.rft_init > self.params.flight_max:
                raise InstanceError(f"aircraft {a.id}: rft_init exceeds flight_max")
            if a.rct_init > self.params.calendar_max:
                # Reduction images switch maintenance off by granting one
                # period more calendar budget than the horizon holds.
                if not (self.reduction_instance and a.rct_init == horizon + 1):
                    raise InstanceError(
                        f"aircraft {a.id}: rct_init exceeds calendar_max"
                    )
            if a.in_maint_remaining > self.params.check_duration:
                raise InstanceError(
                    f"aircraft {a.id}: in_maint_remaining exceeds check duration"
                )
        mission_ids = {m.id for m in self.missions}
        aircraft_ids = {a.id for a in self.fleet}
        for a in self.fleet:
            if a.preassigned is not None and a.preassigned[0] not in mission_ids:
                raise InstanceError(
                    f"aircraft {a.id}: preassigned to unknown mission {a.preassigned[0]}"
                )
        seen = set()
        for c in self.clusters:
            if c.id in seen:
                raise InstanceError(f"duplicate cluster id {c.id}")
            seen.add(c.id)
            for member in c.members:
                if member not in aircraft_ids:
                    raise InstanceError(f"cluster {c.id}: unknown member {member}")
            for series in (c.maint_cap, c.sustain_floor, c.known_in_maint):
                if len(series) != horizon:
                    raise InstanceError(
                        f"cluster {c.id}: per-period series must have length {horizon}"
                    )
            size = len(c.members)
            if any(cap > size for cap in c.maint_cap):
                raise InstanceError(f"cluster {c.id}: maint_cap exceeds cluster size")
            if any(h > size * self.params.flight_max + 1e-9 for h in c.sustain_floor):
                raise InstanceError(
                    f"cluster {c.id}: sustain_floor exceeds cluster flight potential"
                )
        object.__setattr__(self, "sets", derive_index_sets(self))

    @property
    def horizon(self) -> int:
        return self.params.num_periods

    def mission_by_id(self, mission_id: str) -> Mission:
        return self.missions[self.sets.mission_pos[mission_id]]

    def aircraft_by_id(self, aircraft_id: str) -> Aircraft:
        return self.fleet[self.sets.aircraft_pos[aircraft_id]]


@dataclass(frozen=True)
class IndexSets:
    """Materialized index sets, all over positional indices.

    ``active_at[t]`` lists missions active in period t (J_t), ``eligible[j]``
    the aircraft that may serve mission j (I_j), ``missions_of[i]`` its
    inverse (O_i), and ``preassigned_to[j]`` the aircraft continuing a
    pre-horizon assignment to j.
    """

    active_at: tuple[tuple[int, ...], ...]  # index 0 unused
    eligible: tuple[tuple[int, ...], ...]
    missions_of: tuple[tuple[int, ...], ...]
    preassigned_to: tuple[tuple[int, ...], ...]
    mission_pos: dict[str, int]
    aircraft_pos: dict[str, int]


def derive_index_sets(instance: Instance) -> IndexSets:
    """Compute J_t, I_j, O_i and the preassignment sets for an instance.

    Eligibility requires type equality, plus standard membership when the
    mission carries a standard.  A mission whose type matches no aircraft in
    the fleet is a structural error.
    """
    fleet_types = {a.atype for a in instance.fleet}
    mission_pos = {m.id: j for j, m in enumerate(instance.missions)}
    aircraft_pos = {a.id: i for i, a in enumerate(instance.fleet)}

    active = [[] for _ in range(instance.params.num_periods + 1)]
    for j, m in enumerate(instance.missions):
        if m.mtype not in fleet_types:
            raise InstanceError(f"mission {m.id}: no aircraft of type {m.mtype!r}")
        for t in m.window:
            active[t].append(j)

    eligible = []
    missions_of = [[] for _ in instance.fleet]
    for j, m in enumerate(instance.missions):
        rows = []
        for i, a in enumerate(instance.fleet):
            if a.atype != m.mtype:
                continue
            if m.standard is not None and m.standard not in a.standards:
                continue
            rows.append(i)
            missions_of[i].append(j)
        eligible.append(tuple(rows))

    preassigned_to = [[] for _ in instance.missions]
    for i, a in enumerate(instance.fleet):
        if a.preassigned is not None:
            j = mission_pos[a.preassigned[0]]
            if instance.missions[j].start != 1:
                raise InstanceError(
                    f"aircraft {a.id}: preassigned mission does not start at period 1"
                )
            if i not in eligible[j]:
                raise InstanceError(
                    f"aircraft {a.id}: preassigned to incompatible mission"
                )
            preassigned_to[j].append(i)

    return IndexSets(
        active_at=tuple(tuple(row) for row in active),
        eligible=tuple(eligible),
        missions_of=tuple(tuple(row) for row in missions_of),
        preassigned_to=tuple(tuple(row) for row in preassigned_to),
        mission_pos=mission_pos,
        aircraft_pos=aircraft_pos,
    )


# ---------------------------------------------------------------------------
# Time-parametric window sets
# ---------------------------------------------------------------------------


def occupancy_window(t: int, params: Params) -> range:
    """Periods whose check start still occupies period t (T^s_t).

    A check starting at t' runs through t' + M - 1, so the window is
    {max(1, t - M + 1), ..., t}; empty when M = 0.
    """
    return range(max(1, t - params.check_duration + 1), t + 1)


def no_restart_window(t: int, params: Params) -> range:
    """Periods barred from holding another check start after one at t (T^m_t).

    Covers the check itself plus the calendar_min cooldown:
    {t, ..., min(|T|, t + M + E_m - 1)}.
    """
    hi = min(params.num_periods, t + params.check_duration + params.calendar_min - 1)
    return range(t, hi + 1)


def forced_next_window(t: int, params: Params) -> range:
    """Periods in which the successor of a check at t must start (T^M_t).

    Members are {t + M + E_m - 1, ..., t + M + E_M - 1} filtered to
    t' <= |T| - E_M - M: near the horizon end no successor is obligatory
    and the window empties out entirely.
    """
    horizon = params.num_periods
    cap = horizon - params.calendar_max - params.check_duration
    lo = max(1, t + params.check_duration + params.calendar_min - 1)
    hi = min(t + params.check_duration + params.calendar_max - 1, cap, horizon)
    if hi < lo:
        return range(t, t)
    return range(lo, hi + 1)


def window_sets(t: int, params: Params) -> tuple[range, range, range]:
    """The three check-related windows anchored at period t."""
    if not 1 <= t <= params.num_periods:
        raise ValueError(f"period {t} outside [1, {params.num_periods}]")
    return (
        occupancy_window(t, params),
        no_restart_window(t, params),
        forced_next_window(t, params),
    )


def initial_window_sets(aircraft: Aircraft, params: Params) -> tuple[range, range]:
    """No-start and forced-start windows implied by the initial state.

    With effective budget r = rct_init + in_maint_remaining, starts are
    barred through max(0, r - E_M + E_m) and one start is forced inside
    {max(0, r - E_M + E_m), ..., r} clipped to the horizon.  No start is
    forced when r exceeds the horizon.  r = 0 degenerates to a forced start
    at period 1 (calendar budget already exhausted).
    """
    horizon = params.num_periods
    r = aircraft.rct_effective
    lo_raw = max(0, r - params.calendar_max + params.calendar_min)
    barred = range(1, min(lo_raw, horizon) + 1)
    if r > horizon:
        return barred, range(1, 1)
    forced = range(max(1, lo_raw), min(horizon, max(1, r)) + 1)
    return barred, forced


def min_assign_window(mission_id: str, t: int, instance: Instance) -> range:
    """Trailing window over which a start to the mission pins the assignment.

    {max(1, t - MT_j), ..., t}, as defined; note this spans MT_j + 1 periods
    when unclipped.
    """
    m = instance.mission_by_id(mission_id)
    if t not in m.window:
        raise ValueError(f"period {t} outside mission {mission_id} window")
    return range(max(1, t - m.min_assign), t + 1)


# ---------------------------------------------------------------------------
# Solutions
# ---------------------------------------------------------------------------


@dataclass
class Solution:
    """Per-aircraft per-period state grid plus derived ledgers.

    ``grid[i][t]`` (t 1-based, index 0 unused) holds FREE, CHECK_START,
    CHECK_BODY, or a mission id.  The ledgers ``u``/``rft``/``rct`` are None
    until filled by the validator's usage derivation; ``rft[i]`` has an
    extra leading entry for period 0.
    """

    grid: list[list[str]]
    u: list[list[float]] | None = None
    rft: list[list[float]] | None = None
    rct: list[list[float]] | None = None

    @classmethod
    def empty(cls, instance: Instance) -> "Solution":
        """All-free grid with the known in-shop prefixes filled in."""
        horizon = instance.horizon
        grid = []
        for a in instance.fleet:
            row = [FREE] * (horizon + 1)
            for t in range(1, min(a.in_maint_remaining, horizon) + 1):
                row[t] = CHECK_BODY
            grid.append(row)
        return cls(grid=grid)

    def copy(self) -> "Solution":
        return Solution(
            grid=[row[:] for row in self.grid],
            u=None if self.u is None else [row[:] for row in self.u],
            rft=None if self.rft is None else [row[:] for row in self.rft],
            rct=None if self.rct is None else [row[:] for row in self.rct],
        )

    def check_starts(self, i: int) -> list[int]:
        return [t for t in range(1, len(self.grid[i])) if self.grid[i][t] == CHECK_START]

    def validate_structure(self, instance: Instance) -> None:
        """Raise SolutionError unless the grid is representable.

        Mission cells must be eligible and in-window; CHECK_BODY cells must
        sit inside a started check (clipped at the horizon end) or inside
        the aircraft's known initial in-shop prefix.
        """
        horizon = instance.horizon
        if len(self.grid) != len(instance.fleet):
            raise SolutionError("grid row count does not match fleet size")
        for i, row in enumerate(self.grid):
            if len(row) != horizon + 1:
                raise SolutionError(f"aircraft row {i}: wrong horizon length")
            aircraft = instance.fleet[i]
            covered = [False] * (horizon + 2)
            for t in range(1, min(aircraft.in_maint_remaining, horizon) + 1):
                covered[t] = True
            for t in range(1, horizon + 1):
                if row[t] == CHECK_START:
                    for tb in range(t, min(t + instance.params.check_duration - 1, horizon) + 1):
                        covered[tb] = True
            for t in range(1, horizon + 1):
                cell = row[t]
                if cell in (FREE, CHECK_START):
                    continue
                if cell == CHECK_BODY:
                    if not covered[t]:
                        raise SolutionError(
                            f"aircraft {aircraft.id}: stray check body at period {t}"
                        )
                    continue
                if cell not in instance.sets.mission_pos:
                    raise SolutionError(
                        f"aircraft {aircraft.id}: unknown cell {cell!r} at period {t}"
                    )
                j = instance.sets.mission_pos[cell]
                mission = instance.missions[j]
                if t not in mission.window:
                    raise SolutionError(
                        f"aircraft {aircraft.id}: mission {cell} outside window at {t}"
                    )
                if i not in instance.sets.eligible[j]:
                    raise SolutionError(
                        f"aircraft {aircraft.id}: not eligible for mission {cell}"
                    )

    def mission_runs(self, i: int) -> list[tuple[str, int, int]]:
        """Maximal (mission id, first period, last period) blocks for one row."""
        runs = []
        row = self.grid[i]
        t = 1
        while t < len(row):
            cell = row[t]
            if cell in RESERVED_CELLS:
                t += 1
                continue
            t0 = t
            while t + 1 < len(row) and row[t + 1] == cell:
                t += 1
            runs.append((cell, t0, t))
            t += 1
        return runs
