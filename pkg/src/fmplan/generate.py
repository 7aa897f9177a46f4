"""Deterministic, seeded instance generation and scenario grids.

Randomness is drawn from named sub-streams (missions, fleet, initial state)
keyed as SeedSequence((seed, stream)); adding draws to one stream never
perturbs another, which is what keeps paired-seed scenario comparisons
meaningful.  The same config (seed included) always yields a byte-identical
instance document.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .core import Aircraft, Cluster, Instance, Mission, Params

__all__ = [
    "GenerationError",
    "ConfigError",
    "GenConfig",
    "ScenarioGrid",
    "generate_instance",
    "generate_missions",
    "generate_fleet",
    "generate_initial_state",
    "derive_clusters",
    "expand_grid",
    "config_to_jsonable",
    "config_from_jsonable",
    "grid_to_jsonable",
    "grid_from_jsonable",
]

STREAM_MISSIONS = 1
STREAM_FLEET = 2
STREAM_INITIAL = 3

MISSION_DURATION = (6, 12)
MISSION_MIN_ASSIGN = (2, 3, 6)
MISSION_REQUIRED = (2, 5)
MISSION_HOURS_TRI = (30.0, 50.0, 80.0)  # (low, mode, high)
MISSION_STANDARD_CHANCE = 0.10
INITIAL_RCT_NOISE = 3
DEFAULT_FLEET_PER_SLOT = 15


class GenerationError(ValueError):
    """Raised when a config cannot produce a structurally sound instance."""


class ConfigError(ValueError):
    """Raised for invalid generator or scenario configuration."""


@dataclass(frozen=True)
class GenConfig:
    """All generation controls with their default (base-scenario) values.

    ``fleet_size=None`` scales the default fleet with the number of parallel
    mission slots.  ``calendar_win`` is the width E_s of the feasible check
    window; the no-restart span is calendar_max - calendar_win.
    """

    parallel_missions: int = 1
    fleet_size: int | None = None
    num_periods: int = 60
    capacity_pct: float = 0.15
    calendar_max: int = 60
    calendar_win: int = 30
    flight_max: float = 1000.0
    check_duration: int = 6
    default_usage: float = 0.0
    serviceable_min: int = 1
    serviceable_pct: float = 0.1
    sustain_pct: float = 0.5
    mission_types: int = 1
    standard_pool: int = 2
    objective: str = "checks"
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.capacity_pct <= 1:
            raise ConfigError("capacity_pct must lie in (0, 1]")
        if not 0 <= self.calendar_win < self.calendar_max:
            raise ConfigError("need 0 <= calendar_win < calendar_max")
        if not 0 <= self.sustain_pct <= 1:
            raise ConfigError("sustain_pct must lie in [0, 1]")
        if self.parallel_missions < 0 or self.num_periods < 1:
            raise ConfigError("parallel_missions >= 0 and num_periods >= 1 required")
        if self.check_duration < 1:
            raise ConfigError("check_duration must be >= 1")

    @property
    def calendar_min(self) -> int:
        return self.calendar_max - self.calendar_win

    @property
    def effective_fleet_size(self) -> int:
        if self.fleet_size is not None:
            return self.fleet_size
        return DEFAULT_FLEET_PER_SLOT * max(1, self.parallel_missions)


def _stream(config: GenConfig, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((config.seed, stream))))


def _triangular(rng: np.random.Generator, low: float, mode: float, high: float) -> float:
    # Inverse-CDF sampling so the draw costs exactly one uniform.
    u = rng.random()
    cut = (mode - low) / (high - low)
    if u < cut:
        return low + math.sqrt(u * (high - low) * (mode - low))
    return high - math.sqrt((1.0 - u) * (high - low) * (high - mode))


def generate_missions(config: GenConfig, rng: np.random.Generator) -> list[Mission]:
    """Rolling mission slots: a successor starts the period after each end.

    Keeps exactly ``parallel_missions`` missions active in every period; the
    last mission of each slot is truncated at the horizon (its minimum
    assignment clipped to the truncated duration).
    """
    horizon = config.num_periods
    low, mode, high = MISSION_HOURS_TRI
    missions: list[Mission] = []
    counter = 0
    for _slot in range(config.parallel_missions):
        t = 1
        while t <= horizon:
            duration = int(rng.integers(MISSION_DURATION[0], MISSION_DURATION[1] + 1))
            end = min(t + duration - 1, horizon)
            min_assign = int(rng.choice(MISSION_MIN_ASSIGN))
            required = int(rng.integers(MISSION_REQUIRED[0], MISSION_REQUIRED[1] + 1))
            hours = float(math.floor(_triangular(rng, low, mode, high)))
            mtype = f"Y{int(rng.integers(1, config.mission_types + 1))}"
            standard = None
            if rng.random() < MISSION_STANDARD_CHANCE and config.standard_pool > 0:
                standard = f"Q{int(rng.integers(1, config.standard_pool + 1))}"
            counter += 1
            missions.append(
                Mission(
                    id=f"J{counter}",
                    start=t,
                    end=end,
                    hours=hours,
                    required=required,
                    min_assign=min(min_assign, end - t + 1),
                    mtype=mtype,
                    standard=standard,
                )
            )
            t = end + 1
    return missions


def _peak_requirement(missions: list[Mission], horizon: int, key) -> dict:
    """Max over periods of summed aircraft requirements, per key(mission)."""
    peaks: dict = {}
    per_t: dict = {}
    for m in missions:
        k = key(m)
        if k is None:
            continue
        series = per_t.setdefault(k, [0] * (horizon + 1))
        for t in m.window:
            series[t] += m.required
    for k, series in per_t.items():
        peaks[k] = max(series)
    return peaks


def generate_fleet(
    config: GenConfig, missions: list[Mission], rng: np.random.Generator
) -> list[Aircraft]:
    """Type the fleet to cover peak mission demand, then spread standards.

    Every type gets at least its peak simultaneous requirement; leftover
    aircraft are typed randomly, weighted by those requirements.  Each
    (type, standard) pair demanded by a mission is granted to twice its peak
    requirement among same-type aircraft.
    """
    n = config.effective_fleet_size
    horizon = config.num_periods
    type_names = [f"Y{y}" for y in range(1, config.mission_types + 1)]
    peaks = _peak_requirement(missions, horizon, key=lambda m: m.mtype)
    for mtype in peaks:
        if mtype not in type_names:
            type_names.append(mtype)
    minimum = {y: peaks.get(y, 0) for y in type_names}
    total_min = sum(minimum.values())
    if n < total_min:
        raise GenerationError(
            f"fleet of {n} cannot cover peak demand of {total_min} aircraft"
        )

    assigned_types: list[str] = []
    for y in type_names:
        assigned_types.extend([y] * minimum[y])
    weights = np.array([max(minimum[y], 1) for y in type_names], dtype=float)
    weights /= weights.sum()
    for _ in range(n - total_min):
        assigned_types.append(str(rng.choice(type_names, p=weights)))

    standards: list[set[str]] = [set() for _ in range(n)]
    pair_peaks = _peak_requirement(
        missions, horizon, key=lambda m: (m.mtype, m.standard) if m.standard else None
    )
    for (mtype, standard), peak in sorted(pair_peaks.items()):
        same_type = [idx for idx, y in enumerate(assigned_types) if y == mtype]
        if len(same_type) < peak:
            raise GenerationError(
                f"standard {standard}: only {len(same_type)} aircraft of type "
                f"{mtype} for a peak requirement of {peak}"
            )
        target = min(2 * peak, len(same_type))
        holders = rng.choice(np.array(same_type), size=target, replace=False)
        for idx in holders:
            standards[int(idx)].add(standard)

    return [
        Aircraft(id=f"A{idx + 1}", atype=assigned_types[idx], standards=frozenset(standards[idx]))
        for idx in range(n)
    ]


def generate_initial_state(
    config: GenConfig,
    fleet: list[Aircraft],
    missions: list[Mission],
    rng: np.random.Generator,
) -> list[Aircraft]:
    """Simulate the fleet state at the start of the horizon.

    A random share (uniform in [0, capacity_pct]) of the fleet sits in a
    partially elapsed check; the rest get a random calendar budget with the
    flight-hour budget derived proportionally plus noise.  Missions active
    in period 1 take their required aircraft as continuing assignments.
    """
    n = len(fleet)
    e_max = config.calendar_max
    h_max = config.flight_max
    share = rng.uniform(0.0, config.capacity_pct)
    n_maint = int(n * share)
    in_maint = set(int(x) for x in rng.choice(n, size=n_maint, replace=False))

    updated: list[Aircraft] = []
    for idx, aircraft in enumerate(fleet):
        if idx in in_maint:
            updated.append(
                replace(
                    aircraft,
                    in_maint_remaining=int(rng.integers(1, config.check_duration + 1)),
                    rct_init=e_max,
                    rft_init=h_max,
                )
            )
        else:
            rct = int(rng.integers(0, e_max + 1))
            noisy = rct + int(rng.integers(-INITIAL_RCT_NOISE, INITIAL_RCT_NOISE + 1))
            rft = min(max(noisy * h_max / e_max, 0.0), h_max)
            updated.append(replace(aircraft, rct_init=rct, rft_init=rft))

    taken: set[int] = set()
    by_type: dict[str, list[int]] = {}
    for idx, aircraft in enumerate(updated):
        by_type.setdefault(aircraft.atype, []).append(idx)
    for mission in missions:
        if mission.start != 1:
            continue
        candidates = [
            idx
            for idx in by_type.get(mission.mtype, ())
            if idx not in taken
            and idx not in in_maint
            and (mission.standard is None or mission.standard in updated[idx].standards)
        ]
        if len(candidates) < mission.required:
            raise GenerationError(
                f"mission {mission.id}: only {len(candidates)} free aircraft for "
                f"{mission.required} initial assignments"
            )
        chosen = rng.choice(np.array(candidates), size=mission.required, replace=False)
        elapsed = int(rng.integers(0, 2 * mission.min_assign + 1))
        for idx in chosen:
            idx = int(idx)
            taken.add(idx)
            updated[idx] = replace(updated[idx], preassigned=(mission.id, elapsed))
    return updated


def derive_clusters(
    config: GenConfig, fleet: list[Aircraft], missions: list[Mission]
) -> list[Cluster]:
    """One cluster per distinct mission requirement (type, standard).

    The serviceable floor is max(ceil(serviceable_pct * size),
    serviceable_min); the in-shop ceiling is its complement.  The
    sustainability floor is sustain_pct of the cluster's full flight
    potential.  All per-period series are constant.
    """
    horizon = config.num_periods
    requirements = sorted({(m.mtype, m.standard or "") for m in missions})
    clusters: list[Cluster] = []
    for n_k, (mtype, standard) in enumerate(requirements, start=1):
        members = tuple(
            a.id
            for a in fleet
            if a.atype == mtype and (not standard or standard in a.standards)
        )
        if not members:
            raise GenerationError(
                f"requirement ({mtype}, {standard or 'no standard'}) has no aircraft"
            )
        size = len(members)
        floor = max(math.ceil(config.serviceable_pct * size), config.serviceable_min)
        cap = max(size - floor, 0)
        known = [0] * horizon
        by_id = {a.id: a for a in fleet}
        for t in range(1, horizon + 1):
            known[t - 1] = sum(
                1 for aid in members if by_id[aid].in_maint_remaining >= t
            )
        clusters.append(
            Cluster(
                id=f"K{n_k}",
                members=members,
                maint_cap=tuple([cap] * horizon),
                sustain_floor=tuple([config.sustain_pct * size * config.flight_max] * horizon),
                known_in_maint=tuple(known),
            )
        )
    return clusters


def generate_instance(config: GenConfig) -> Instance:
    """Full instance for one config; a pure function of the config."""
    missions = generate_missions(config, _stream(config, STREAM_MISSIONS))
    fleet = generate_fleet(config, missions, _stream(config, STREAM_FLEET))
    fleet = generate_initial_state(config, fleet, missions, _stream(config, STREAM_INITIAL))
    clusters = derive_clusters(config, fleet, missions)

    horizon = config.num_periods
    n_t = [0] * horizon
    for aircraft in fleet:
        for t in range(1, min(aircraft.in_maint_remaining, horizon) + 1):
            n_t[t - 1] += 1
    params = Params(
        num_periods=horizon,
        check_duration=config.check_duration,
        capacity=math.ceil(config.capacity_pct * len(fleet)),
        calendar_max=config.calendar_max,
        calendar_min=config.calendar_min,
        flight_max=config.flight_max,
        default_usage=config.default_usage,
        in_maintenance=tuple(n_t),
    )
    return Instance(
        params=params, missions=tuple(missions), fleet=tuple(fleet), clusters=tuple(clusters)
    )


# ---------------------------------------------------------------------------
# Scenario grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioGrid:
    """A base config plus single-parameter overrides, one scenario each."""

    base: GenConfig
    overrides: tuple[tuple[str, object], ...] = ()
    instances_per_scenario: int = 1

    def __post_init__(self):
        names = {f.name for f in fields(GenConfig)}
        for name, _ in self.overrides:
            if name not in names:
                raise ConfigError(f"unknown config parameter {name!r}")
        if self.instances_per_scenario < 0:
            raise ConfigError("instances_per_scenario must be >= 0")


def expand_grid(grid: ScenarioGrid) -> list[tuple[str, GenConfig, int]]:
    """(scenario name, config, seed) per instance, seeds paired by position.

    Instance k of every scenario carries seed base.seed + k, so the k-th
    instances across scenarios differ only through the overridden parameter.
    """
    scenarios: list[tuple[str, GenConfig]] = [("base", grid.base)]
    for name, value in grid.overrides:
        scenarios.append((f"{name}={value}", replace(grid.base, **{name: value})))
    out = []
    for scenario_name, config in scenarios:
        for k in range(grid.instances_per_scenario):
            seed = grid.base.seed + k
            out.append((scenario_name, replace(config, seed=seed), seed))
    return out


# ---------------------------------------------------------------------------
# Config documents
# ---------------------------------------------------------------------------

CONFIG_FORMAT = "fmplan-genconfig"
GRID_FORMAT = "fmplan-grid"


def config_to_jsonable(config: GenConfig) -> dict:
    doc = {"format": CONFIG_FORMAT, "version": 1}
    for f in fields(GenConfig):
        doc[f.name] = getattr(config, f.name)
    return doc


def config_from_jsonable(doc: dict) -> GenConfig:
    if doc.get("format") not in (None, CONFIG_FORMAT):
        raise ConfigError(f"not a generator config: format={doc.get('format')!r}")
    names = {f.name for f in fields(GenConfig)}
    kwargs = {k: v for k, v in doc.items() if k in names}
    unknown = set(doc) - names - {"format", "version"}
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    return GenConfig(**kwargs)


def grid_to_jsonable(grid: ScenarioGrid) -> dict:
    return {
        "format": GRID_FORMAT,
        "version": 1,
        "base": config_to_jsonable(grid.base),
        "overrides": [[name, value] for name, value in grid.overrides],
        "instances_per_scenario": grid.instances_per_scenario,
    }


def grid_from_jsonable(doc: dict) -> ScenarioGrid:
    if doc.get("format") != GRID_FORMAT:
        raise ConfigError(f"not a scenario grid: format={doc.get('format')!r}")
    return ScenarioGrid(
        base=config_from_jsonable(doc["base"]),
        overrides=tuple((name, value) for name, value in doc.get("overrides", ())),
        instances_per_scenario=doc.get("instances_per_scenario", 1),
    )
