"""Shared fixtures and fuzz samplers.

``random_tiny_instance`` draws structurally valid miniature problems sized
for the exhaustive oracles; ``random_grid`` draws representable (not
necessarily feasible) state grids over an instance.  Both are plain
functions of a numpy Generator so tests can freeze seeds.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from fmplan.core import Aircraft, Cluster, Instance, Mission, Params, Solution
from fmplan.generate import GenConfig
from fmplan.kernels import solution_from_arrays


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def random_tiny_instance(
    rng: np.random.Generator,
    max_aircraft: int = 3,
    max_periods: int = 6,
    allow_understaffed: bool = False,
) -> Instance:
    """A small random instance inside the exhaustive-search guard."""
    n_i = int(rng.integers(1, max_aircraft + 1))
    horizon = int(rng.integers(3, max_periods + 1))
    m = int(rng.integers(1, 3))
    e_max = int(rng.integers(2, horizon + 2))
    # Long cooldowns relative to these horizons almost always deadlock;
    # keep them short most of the time but still sample the full range.
    if rng.random() < 0.75:
        e_min = int(rng.integers(0, max(e_max // 2, 1)))
    else:
        e_min = int(rng.integers(0, e_max + 1))
    h_max = float(rng.integers(20, 61))
    u_min = float(rng.choice([0.0, 0.0, 0.0, 5.0]))

    fleet = []
    n_maint = int(rng.integers(0, 2)) if n_i > 1 else 0
    for i in range(n_i):
        nm = int(rng.integers(1, min(m, 2) + 1)) if i < n_maint else 0
        if nm > 0:
            rct, rft = e_max, h_max
        else:
            # Mostly live calendar and flight budgets, with an occasional
            # tight one so forced checks and exhausted ledgers still occur.
            roll = rng.random()
            if roll < 0.5:
                rct = e_max
            elif roll < 0.75:
                rct = int(rng.integers(max(1, e_max // 2), e_max + 1))
            else:
                rct = int(rng.integers(0, e_max + 1))
            rft = float(rng.integers(int(h_max) // 2, int(h_max) + 1))
            if rng.random() < 0.2:
                rft = float(rng.integers(0, int(h_max) + 1))
        fleet.append(
            Aircraft(
                id=f"A{i + 1}",
                atype="y",
                standards=frozenset({"s"} if rng.random() < 0.3 else ()),
                rft_init=rft,
                rct_init=rct,
                in_maint_remaining=nm,
            )
        )

    n_j = int(rng.integers(0, 3))
    missions = []
    for j in range(n_j):
        start = int(rng.integers(1, horizon + 1))
        end = int(rng.integers(start, horizon + 1))
        duration = end - start + 1
        standard = "s" if rng.random() < 0.2 else None
        eligible = [
            a
            for a in fleet
            if standard is None or standard in a.standards
        ]
        if not eligible:
            standard = None
            eligible = fleet
        max_req = len(eligible) if allow_understaffed else max(1, len(eligible) - 0)
        required = int(rng.integers(1, min(max_req, n_i) + 1))
        missions.append(
            Mission(
                id=f"J{j + 1}",
                start=start,
                end=end,
                hours=float(rng.integers(0, int(h_max // 2) + 1)),
                required=required,
                min_assign=int(rng.integers(1, duration + 1)),
                mtype="y",
                standard=standard,
            )
        )

    # An occasional pre-horizon assignment continuing into the grid.
    fleet_out = list(fleet)
    first_active = [mi for mi in missions if mi.start == 1]
    if first_active and rng.random() < 0.4:
        mission = first_active[0]
        candidates = [
            idx
            for idx, a in enumerate(fleet_out)
            if a.in_maint_remaining == 0
            and a.atype == mission.mtype
            and (mission.standard is None or mission.standard in a.standards)
        ]
        if candidates:
            idx = int(rng.choice(candidates))
            a = fleet_out[idx]
            fleet_out[idx] = Aircraft(
                id=a.id,
                atype=a.atype,
                standards=a.standards,
                rft_init=a.rft_init,
                rct_init=a.rct_init,
                preassigned=(mission.id, int(rng.integers(0, 2 * mission.min_assign + 1))),
            )

    n_t = [0] * horizon
    for a in fleet_out:
        for t in range(1, min(a.in_maint_remaining, horizon) + 1):
            n_t[t - 1] += 1
    capacity = max(
        int(rng.integers(max(1, n_i // 2), n_i + 1)), max(n_t, default=0), 1
    )

    clusters = []
    if rng.random() < 0.5 and fleet_out:
        members = tuple(a.id for a in fleet_out)
        known = [0] * horizon
        for a in fleet_out:
            for t in range(1, min(a.in_maint_remaining, horizon) + 1):
                known[t - 1] += 1
        cap = max(int(rng.integers(0, n_i + 1)), max(known, default=0))
        floor = float(rng.integers(0, int(n_i * h_max * 0.4) + 1))
        clusters.append(
            Cluster(
                id="K1",
                members=members,
                maint_cap=tuple([cap] * horizon),
                sustain_floor=tuple([floor] * horizon),
                known_in_maint=tuple(known),
            )
        )

    params = Params(
        num_periods=horizon,
        check_duration=m,
        capacity=capacity,
        calendar_max=e_max,
        calendar_min=e_min,
        flight_max=h_max,
        default_usage=u_min,
        in_maintenance=tuple(n_t),
    )
    return Instance(
        params=params,
        missions=tuple(missions),
        fleet=tuple(fleet_out),
        clusters=tuple(clusters),
    )


def random_grid(instance: Instance, rng: np.random.Generator) -> Solution:
    """A representable random grid: eligible in-window missions, random
    check starts (spacing violations allowed), known prefixes kept."""
    horizon = instance.horizon
    n_i = len(instance.fleet)
    mission_of = np.full((n_i, horizon + 1), -1, dtype=np.int64)
    start = np.zeros((n_i, horizon + 1), dtype=np.uint8)
    for i, aircraft in enumerate(instance.fleet):
        nm = aircraft.in_maint_remaining
        for _ in range(int(rng.integers(0, 3))):
            t = int(rng.integers(1, horizon + 1))
            if t > nm:
                start[i, t] = 1
        options_by_t = [
            [j for j in instance.sets.active_at[t] if i in instance.sets.eligible[j]]
            for t in range(horizon + 1)
        ]
        t = 1
        while t <= horizon:
            opts = options_by_t[t]
            if start[i, t] or not opts or rng.random() > 0.45:
                t += 1
                continue
            j = int(rng.choice(opts))
            length = int(rng.integers(1, instance.missions[j].min_assign + 3))
            placed = False
            for tt in range(t, min(t + length - 1, horizon) + 1):
                if start[i, tt] or tt not in instance.missions[j].window:
                    break
                mission_of[i, tt] = j
                placed = True
            t += length if placed else 1
    return solution_from_arrays(instance, mission_of, start)


@pytest.fixture
def base_config() -> GenConfig:
    return GenConfig(seed=20240)
