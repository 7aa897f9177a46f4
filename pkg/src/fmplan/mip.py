"""Solver-agnostic sparse optimization model for the planning problem.

``build_model`` emits the exact mixed-integer formulation as typed variables
and linear rows; ``fix_initial_conditions`` pins the variables implied by the
initial fleet state via bounds.  The model is pure data (no solver binding);
LP-format file exchange lives in ``lpfile`` and external solver values come
back through ``extract_solution``.

Two row families are emitted in aggregated but binary-equivalent form: the
check-spacing constraint becomes one window-packing row per aircraft-period
(at most one start per no-restart window), and the in-check flight-time pin
sums the occupying starts instead of one row per (period, start) pair.  Both
collapse a quadratic row count into the per-period budget the raw model
sizes are measured against, without changing the feasible set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import CHECK_BODY, CHECK_START, FREE, Instance, Solution, initial_window_sets
from .kernels import TOL, solution_from_arrays
from .validate import OBJ_CHECKS, OBJ_CHECKS_RFT, derive_usage

__all__ = [
    "ModelError",
    "Variable",
    "Row",
    "MatrixModel",
    "ModelStats",
    "build_model",
    "fix_initial_conditions",
    "model_stats",
    "encode_solution",
    "violated_names",
    "extract_solution",
    "enumerate_model_optimum",
]


class ModelError(ValueError):
    """Raised when an instance cannot be encoded as a model."""


@dataclass
class Variable:
    name: str
    kind: str  # "binary" or "continuous"
    lb: float
    ub: float
    # (family, mission j, period t, aircraft i); -1 where not applicable
    meta: tuple[str, int, int, int]


@dataclass
class Row:
    name: str
    coeffs: list[tuple[int, float]]  # (column, coefficient)
    sense: str  # "<=", ">=", "="
    rhs: float


@dataclass
class MatrixModel:
    variables: list[Variable] = field(default_factory=list)
    rows: list[Row] = field(default_factory=list)
    objective: list[tuple[int, float]] = field(default_factory=list)
    var_index: dict[str, int] = field(default_factory=dict)

    def add_var(self, name, kind, lb, ub, meta) -> int:
        if name in self.var_index:
            raise ModelError(f"duplicate variable name {name}")
        self.variables.append(Variable(name, kind, lb, ub, meta))
        self.var_index[name] = len(self.variables) - 1
        return len(self.variables) - 1

    def add_row(self, name, coeffs, sense, rhs) -> None:
        merged: dict[int, float] = {}
        for col, coef in coeffs:
            merged[col] = merged.get(col, 0.0) + coef
        clean = [(col, coef) for col, coef in merged.items() if coef != 0.0]
        clean.sort()
        if not clean:
            # Constant row; representable only when trivially satisfied.
            if (
                (sense == "<=" and 0 > rhs + TOL)
                or (sense == ">=" and 0 < rhs - TOL)
                or (sense == "=" and abs(rhs) > TOL)
            ):
                raise ModelError(f"row {name} has no variables and is infeasible")
            return
        self.rows.append(Row(name, clean, sense, rhs))

    def column(self, name: str) -> int:
        return self.var_index[name]


@dataclass(frozen=True)
class ModelStats:
    n_vars: int
    n_cons: int
    n_nonzeros: int
    n_binary: int


def model_stats(model: MatrixModel) -> ModelStats:
    """Raw (pre-presolve) counts; nonzeros counted over constraint rows."""
    return ModelStats(
        n_vars=len(model.variables),
        n_cons=len(model.rows),
        n_nonzeros=sum(len(r.coeffs) for r in model.rows),
        n_binary=sum(1 for v in model.variables if v.kind == "binary"),
    )


def _occupancy(t: int, m: int) -> range:
    return range(max(1, t - m + 1), t + 1)


def build_model(instance: Instance, objective_kind: str = OBJ_CHECKS) -> MatrixModel:
    """Construct the full model over the instance's valid index sets."""
    p = instance.params
    horizon = p.num_periods
    sets = instance.sets
    n_i = len(instance.fleet)
    M = p.check_duration
    h_max = p.flight_max
    u_min = p.default_usage
    model = MatrixModel()

    for j, mission in enumerate(instance.missions):
        if not sets.eligible[j]:
            raise ModelError(
                f"mission {mission.id}: no eligible aircraft, requirement row "
                "cannot be encoded"
            )

    # Variables: assignment and start binaries, check-start binaries, then
    # the continuous flown-time and remaining-flight-time ledgers.
    a = {}
    for j, mission in enumerate(instance.missions):
        for t in mission.window:
            for i in sets.eligible[j]:
                a[j, t, i] = model.add_var(
                    f"a_{j}_{t}_{i}", "binary", 0, 1, ("a", j, t, i)
                )
    a_s = {}
    for j, mission in enumerate(instance.missions):
        for t in mission.window:
            for i in sets.eligible[j]:
                a_s[j, t, i] = model.add_var(
                    f"as_{j}_{t}_{i}", "binary", 0, 1, ("as", j, t, i)
                )
    m_var = {}
    for i in range(n_i):
        for t in range(1, horizon + 1):
            m_var[i, t] = model.add_var(f"m_{i}_{t}", "binary", 0, 1, ("m", -1, t, i))
    usage_ub = max((mi.hours for mi in instance.missions), default=max(u_min, 0.0))
    u_var = {}
    for i in range(n_i):
        for t in range(1, horizon + 1):
            u_var[i, t] = model.add_var(
                f"u_{i}_{t}", "continuous", 0, usage_ub, ("u", -1, t, i)
            )
    rft_var = {}
    for i in range(n_i):
        for t in range(1, horizon + 1):
            rft_var[i, t] = model.add_var(
                f"rft_{i}_{t}", "continuous", 0, h_max, ("rft", -1, t, i)
            )

    if objective_kind == OBJ_CHECKS:
        model.objective = [(m_var[i, t], 1.0) for i in range(n_i) for t in range(1, horizon + 1)]
    elif objective_kind == OBJ_CHECKS_RFT:
        model.objective = [
            (m_var[i, t], h_max) for i in range(n_i) for t in range(1, horizon + 1)
        ] + [(rft_var[i, horizon], -1.0) for i in range(n_i)]
    else:
        raise ValueError(f"unknown objective kind {objective_kind!r}")

    # Fleet-wide check capacity.
    for t in range(1, horizon + 1):
        coeffs = [
            (m_var[i, tp], 1.0) for i in range(n_i) for tp in _occupancy(t, M)
        ]
        model.add_row(f"cap_{t}", coeffs, "<=", p.capacity - p.known_in_maintenance(t))

    # Mission aircraft requirements.
    for j, mission in enumerate(instance.missions):
        for t in mission.window:
            model.add_row(
                f"req_{j}_{t}",
                [(a[j, t, i], 1.0) for i in sets.eligible[j]],
                ">=",
                mission.required,
            )

    # One activity per aircraft-period.
    for i in range(n_i):
        for t in range(1, horizon + 1):
            coeffs = [(m_var[i, tp], 1.0) for tp in _occupancy(t, M)]
            coeffs += [
                (a[j, t, i], 1.0)
                for j in sets.active_at[t]
                if (j, t, i) in a
            ]
            model.add_row(f"one_{i}_{t}", coeffs, "<=", 1)

    # Assignment-start detection; period 1 compares against the pre-horizon
    # assignment set instead of a variable.
    for j, mission in enumerate(instance.missions):
        pre = set(sets.preassigned_to[j])
        for t in mission.window:
            for i in sets.eligible[j]:
                coeffs = [(a_s[j, t, i], 1.0), (a[j, t, i], -1.0)]
                rhs = 0.0
                if t - 1 in mission.window:
                    coeffs.append((a[j, t - 1, i], 1.0))
                elif t == 1 and i in pre:
                    rhs = -1.0
                model.add_row(f"strt_{j}_{t}_{i}", coeffs, ">=", rhs)

    # Minimum consecutive assignment (the strengthened trailing-window form).
    for j, mission in enumerate(instance.missions):
        mt = mission.min_assign
        for t in mission.window:
            for i in sets.eligible[j]:
                coeffs = [
                    (a_s[j, tp, i], 1.0)
                    for tp in range(max(1, t - mt), t + 1)
                    if tp in mission.window
                ]
                coeffs.append((a[j, t, i], -1.0))
                model.add_row(f"mina_{j}_{t}_{i}", coeffs, "<=", 0)

    # Cluster serviceability ceiling and sustainability floor.
    for k, cluster in enumerate(instance.clusters):
        members = [sets.aircraft_pos[aid] for aid in cluster.members]
        for t in range(1, horizon + 1):
            coeffs = [
                (m_var[i, tp], 1.0) for i in members for tp in _occupancy(t, M)
            ]
            model.add_row(
                f"serv_{k}_{t}",
                coeffs,
                "<=",
                cluster.maint_cap[t - 1] - cluster.known_in_maint[t - 1],
            )
        for t in range(1, horizon + 1):
            model.add_row(
                f"sust_{k}_{t}",
                [(rft_var[i, t], 1.0) for i in members],
                ">=",
                cluster.sustain_floor[t - 1],
            )

    # Flown time: at least the assigned mission hours, and at least the
    # default usage when no check occupies the period.  For periods inside a
    # known initial in-shop stay the default-usage requirement is a constant
    # zero (the occupying check started before the horizon and has no start
    # variable here).
    for i in range(n_i):
        for t in range(1, horizon + 1):
            coeffs = [(u_var[i, t], 1.0)]
            coeffs += [
                (a[j, t, i], -instance.missions[j].hours)
                for j in sets.active_at[t]
                if (j, t, i) in a
            ]
            model.add_row(f"fly_{i}_{t}", coeffs, ">=", 0)
    for i in range(n_i):
        known_prefix = instance.fleet[i].in_maint_remaining
        for t in range(1, horizon + 1):
            coeffs = [(u_var[i, t], 1.0)]
            coeffs += [(m_var[i, tp], u_min) for tp in _occupancy(t, M)]
            rhs = 0.0 if t <= known_prefix else u_min
            model.add_row(f"idle_{i}_{t}", coeffs, ">=", rhs)

    # Remaining flight time: consumption recurrence (period 1 folds the
    # initial value into the right-hand side) and the in-check pin.
    for i in range(n_i):
        for t in range(1, horizon + 1):
            coeffs = [
                (rft_var[i, t], 1.0),
                (m_var[i, t], -h_max),
                (u_var[i, t], 1.0),
            ]
            if t > 1:
                coeffs.append((rft_var[i, t - 1], -1.0))
                rhs = 0.0
            else:
                rhs = instance.fleet[i].rft_init
            model.add_row(f"rftu_{i}_{t}", coeffs, "<=", rhs)
    for i in range(n_i):
        for t in range(1, horizon + 1):
            coeffs = [(rft_var[i, t], 1.0)]
            coeffs += [(m_var[i, tp], -h_max) for tp in _occupancy(t, M)]
            model.add_row(f"rftc_{i}_{t}", coeffs, ">=", 0)

    # Calendar spacing: window packing (at most one start per no-restart
    # window), forced successor starts for early checks, and the windows
    # implied by the initial state.
    span = M + p.calendar_min - 1
    for i in range(n_i):
        for t in range(1, horizon + 1):
            window = range(t, min(horizon, t + span) + 1)
            if len(window) < 2:
                continue
            model.add_row(
                f"calp_{i}_{t}", [(m_var[i, tp], 1.0) for tp in window], "<=", 1
            )
    cap = horizon - p.calendar_max - M
    for i in range(n_i):
        for t in range(1, horizon + 1):
            lo = max(1, t + M + p.calendar_min - 1)
            hi = min(t + M + p.calendar_max - 1, cap, horizon)
            if hi < lo:
                continue
            coeffs = [(m_var[i, tp], 1.0) for tp in range(lo, hi + 1)]
            coeffs.append((m_var[i, t], -1.0))
            model.add_row(f"caln_{i}_{t}", coeffs, ">=", 0)
    for i, aircraft in enumerate(instance.fleet):
        barred, forced = initial_window_sets(aircraft, p)
        for t in barred:
            model.add_row(f"cali0_{i}_{t}", [(m_var[i, t], 1.0)], "=", 0)
        if len(forced):
            model.add_row(
                f"cali1_{i}", [(m_var[i, tp], 1.0) for tp in forced], ">=", 1
            )

    return model


def fix_initial_conditions(model: MatrixModel, instance: Instance) -> MatrixModel:
    """Pin variables implied by the initial fleet state (bounds, in place).

    Aircraft inside a known check get zero upper bounds on their start and
    assignment variables for the remaining check periods; aircraft short of
    the minimum assignment on a pre-horizon mission get the continuation
    pinned to one.  The model is treated as immutable afterwards.
    """
    sets = instance.sets
    for i, aircraft in enumerate(instance.fleet):
        nm = aircraft.in_maint_remaining
        if nm > 0 and aircraft.preassigned is not None:
            raise ModelError(
                f"aircraft {aircraft.id}: in maintenance and preassigned at once"
            )
        for t in range(1, min(nm, instance.horizon) + 1):
            _set_ub(model, f"m_{i}_{t}", 0.0)
            for j in sets.active_at[t]:
                if i in sets.eligible[j]:
                    _set_ub(model, f"a_{j}_{t}_{i}", 0.0)
        if aircraft.preassigned is not None:
            mission_id, elapsed = aircraft.preassigned
            j = sets.mission_pos[mission_id]
            mission = instance.missions[j]
            pinned = min(max(0, mission.min_assign - elapsed), mission.end)
            for t in range(1, pinned + 1):
                _set_lb(model, f"a_{j}_{t}_{i}", 1.0)
    return model


def _set_ub(model: MatrixModel, name: str, ub: float) -> None:
    var = model.variables[model.var_index[name]]
    var.ub = min(var.ub, ub)
    if var.lb > var.ub:
        raise ModelError(f"conflicting fixes on {name}: lb {var.lb} > ub {var.ub}")


def _set_lb(model: MatrixModel, name: str, lb: float) -> None:
    var = model.variables[model.var_index[name]]
    var.lb = max(var.lb, lb)
    if var.lb > var.ub:
        raise ModelError(f"conflicting fixes on {name}: lb {var.lb} > ub {var.ub}")


# ---------------------------------------------------------------------------
# Encoding solutions as variable values and back
# ---------------------------------------------------------------------------


def encode_solution(
    model: MatrixModel, instance: Instance, solution: Solution
) -> dict[str, float]:
    """Variable values for a state grid, with the canonical ledgers.

    Start binaries are the exact fresh-start indicators (the minimal choice
    consistent with the start-detection rows); u and rft come from the
    validator's usage derivation.
    """
    work = solution if solution.u is not None else derive_usage(instance, solution.copy())
    sets = instance.sets
    values = {v.name: 0.0 for v in model.variables}
    for i in range(len(instance.fleet)):
        row = work.grid[i]
        for t in range(1, instance.horizon + 1):
            cell = row[t]
            if cell == CHECK_START:
                values[f"m_{i}_{t}"] = 1.0
            elif cell not in (FREE, CHECK_BODY):
                j = sets.mission_pos[cell]
                values[f"a_{j}_{t}_{i}"] = 1.0
            values[f"u_{i}_{t}"] = work.u[i][t]
            values[f"rft_{i}_{t}"] = work.rft[i][t]
    for j, mission in enumerate(instance.missions):
        pre = set(sets.preassigned_to[j])
        for t in mission.window:
            for i in sets.eligible[j]:
                now = values[f"a_{j}_{t}_{i}"]
                if t - 1 in mission.window:
                    before = values[f"a_{j}_{t - 1}_{i}"]
                elif t == 1 and i in pre:
                    before = 1.0
                else:
                    before = 0.0
                values[f"as_{j}_{t}_{i}"] = max(0.0, now - before)
    return values


def violated_names(
    model: MatrixModel, values: dict[str, float], tol: float = TOL
) -> list[str]:
    """Names of rows and variable bounds the values fail, in model order."""
    bad = []
    for var in model.variables:
        x = values[var.name]
        if x < var.lb - tol or x > var.ub + tol:
            bad.append(f"bound:{var.name}")
    cols = model.variables
    for row in model.rows:
        total = sum(coef * values[cols[col].name] for col, coef in row.coeffs)
        if row.sense == "<=" and total > row.rhs + tol:
            bad.append(row.name)
        elif row.sense == ">=" and total < row.rhs - tol:
            bad.append(row.name)
        elif row.sense == "=" and abs(total - row.rhs) > tol:
            bad.append(row.name)
    return bad


def objective_value(model: MatrixModel, values: dict[str, float]) -> float:
    cols = model.variables
    return sum(coef * values[cols[col].name] for col, coef in model.objective)


def parse_var_values(text: str) -> dict[str, float]:
    """Parse the external-solver exchange format: one "name value" per line.

    Blank lines and lines starting with '#' or '\\' are ignored.
    """
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("\\"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ModelError(f"values line {lineno}: expected 'name value', got {raw!r}")
        try:
            values[parts[0]] = float(parts[1])
        except ValueError:
            raise ModelError(f"values line {lineno}: bad number {parts[1]!r}") from None
    return values


def format_var_values(values: dict[str, float], skip_zero: bool = False) -> str:
    lines = []
    for name, value in values.items():
        if skip_zero and value == 0.0:
            continue
        lines.append(f"{name} {_fmt_value(value)}")
    return "\n".join(lines) + "\n"


def _fmt_value(value: float) -> str:
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def extract_solution(
    model: MatrixModel,
    var_values: dict[str, float],
    instance: Instance,
    tol: float = TOL,
) -> Solution:
    """Rebuild a state grid from external solver values.

    Binary variables must be integral within ``tol``; variables missing from
    the mapping count as zero (solvers routinely omit zeros).  The u/rft/rct
    ledgers are rederived rather than trusted from the file.
    """
    fractional = []
    for var in model.variables:
        if var.kind != "binary":
            continue
        x = var_values.get(var.name, 0.0)
        if abs(x - round(x)) > tol:
            fractional.append(f"{var.name}={x}")
    if fractional:
        raise ModelError(
            "fractional binary values: " + ", ".join(sorted(fractional)[:20])
        )

    horizon = instance.horizon
    n_i = len(instance.fleet)
    starts = [[False] * (horizon + 1) for _ in range(n_i)]
    missions = [[-1] * (horizon + 1) for _ in range(n_i)]
    for var in model.variables:
        if var.kind != "binary":
            continue
        if round(var_values.get(var.name, 0.0)) != 1:
            continue
        fam, j, t, i = var.meta
        if fam == "m":
            starts[i][t] = True
        elif fam == "a":
            if missions[i][t] >= 0:
                raise ModelError(
                    f"aircraft {instance.fleet[i].id}, period {t}: "
                    "two missions assigned at once"
                )
            missions[i][t] = j

    mission_of = np.array(missions, dtype=np.int64)
    start_arr = np.array([[1 if s else 0 for s in row] for row in starts], dtype=np.uint8)
    solution = solution_from_arrays(instance, mission_of, start_arr)
    return derive_usage(instance, solution)


# ---------------------------------------------------------------------------
# Exhaustive enumeration of model points (cross-check oracle)
# ---------------------------------------------------------------------------


def enumerate_model_optimum(
    model: MatrixModel,
    instance: Instance,
    max_aircraft: int = 3,
    max_periods: int = 8,
):
    """Exact optimum over encodable model points, by row evaluation only.

    Walks state grids column by column; feasibility pruning comes purely
    from evaluating the model's own rows (each as soon as all its variables
    are decided) and the variable bounds.  This is the model-side twin of
    the validator's exhaustive oracle: the two share no constraint logic.

    Returns ``(status, value)`` with status "optimal" or "infeasible".
    """
    n_i = len(instance.fleet)
    horizon = instance.horizon
    if n_i > max_aircraft or horizon > max_periods:
        raise ValueError("instance too large for model-point enumeration")

    sets = instance.sets
    p = instance.params
    M = p.check_duration
    n_vars = len(model.variables)
    values = [0.0] * n_vars

    # Row scheduling: evaluate each row when its latest-period variable is
    # decided (all variables of period <= t are decided after column t).
    rows_at = [[] for _ in range(horizon + 1)]
    for row in model.rows:
        latest = max(model.variables[col].meta[2] for col, _ in row.coeffs)
        rows_at[latest].append(row)
    vars_at = [[] for _ in range(horizon + 1)]
    for idx, var in enumerate(model.variables):
        vars_at[var.meta[2]].append(idx)

    # Objective bound: decided part plus the best case of undecided terms.
    suffix_best = [0.0] * (horizon + 2)
    contrib_at = [0.0] * (horizon + 1)
    for col, coef in model.objective:
        var = model.variables[col]
        contrib_at[var.meta[2]] += min(coef * var.lb, coef * var.ub)
    for t in range(horizon, 0, -1):
        suffix_best[t] = suffix_best[t + 1] + contrib_at[t]

    mission_opts = [
        [
            [j for j in sets.active_at[t] if i in sets.eligible[j]]
            for t in range(horizon + 1)
        ]
        for i in range(n_i)
    ]
    pre_of = [-1] * n_i
    for j in range(len(instance.missions)):
        for i in sets.preassigned_to[j]:
            pre_of[i] = j

    cells = [[-1] * (horizon + 1) for _ in range(n_i)]  # -1 free, -2 start, j
    last_starts = [[] for _ in range(n_i)]
    rft_led = [[0.0] * (horizon + 1) for _ in range(n_i)]
    for i in range(n_i):
        rft_led[i][0] = instance.fleet[i].rft_init
    nm = [a.in_maint_remaining for a in instance.fleet]

    best = [math.inf]
    obj_cols = {}
    for col, coef in model.objective:
        obj_cols[col] = obj_cols.get(col, 0.0) + coef

    var_idx = model.var_index

    def commit_column(t: int) -> bool:
        """Set all period-t variable values; False when a row or bound fails."""
        for i in range(n_i):
            opt = cells[i][t]
            is_start = opt == -2
            values[var_idx[f"m_{i}_{t}"]] = 1.0 if is_start else 0.0
            covered = any(s >= t - M + 1 for s in last_starts[i])
            j_here = opt if opt >= 0 else -1
            hours = instance.missions[j_here].hours if j_here >= 0 else 0.0
            if not covered and t > nm[i]:
                hours = max(hours, p.default_usage)
            values[var_idx[f"u_{i}_{t}"]] = hours
            credit = p.flight_max if is_start else 0.0
            rft_led[i][t] = min(rft_led[i][t - 1] + credit - hours, p.flight_max)
            values[var_idx[f"rft_{i}_{t}"]] = rft_led[i][t]
        for j in sets.active_at[t]:
            mission = instance.missions[j]
            pre = sets.preassigned_to[j]
            for i in sets.eligible[j]:
                now = 1.0 if cells[i][t] == j else 0.0
                values[var_idx[f"a_{j}_{t}_{i}"]] = now
                if t - 1 in mission.window:
                    before = values[var_idx[f"a_{j}_{t - 1}_{i}"]]
                elif t == 1 and i in pre:
                    before = 1.0
                else:
                    before = 0.0
                values[var_idx[f"as_{j}_{t}_{i}"]] = max(0.0, now - before)
        for idx in vars_at[t]:
            var = model.variables[idx]
            if values[idx] < var.lb - TOL or values[idx] > var.ub + TOL:
                return False
        for row in rows_at[t]:
            total = sum(coef * values[col] for col, coef in row.coeffs)
            if row.sense == "<=" and total > row.rhs + TOL:
                return False
            if row.sense == ">=" and total < row.rhs - TOL:
                return False
            if row.sense == "=" and abs(total - row.rhs) > TOL:
                return False
        return True

    def partial_objective(t_done: int) -> float:
        total = 0.0
        for col, coef in obj_cols.items():
            if model.variables[col].meta[2] <= t_done:
                total += coef * values[col]
        return total

    def search(i: int, t: int):
        if t > horizon:
            value = partial_objective(horizon)
            if value < best[0] - 1e-9:
                best[0] = value
            return
        if i == n_i:
            if not commit_column(t):
                return
            if partial_objective(t) + suffix_best[t + 1] >= best[0] - 1e-9:
                return
            search(0, t + 1)
            return
        opts = [-1] + mission_opts[i][t] + [-2]
        for opt in opts:
            cells[i][t] = opt
            if opt == -2:
                last_starts[i].append(t)
            search(i + 1, t)
            if opt == -2:
                last_starts[i].pop()
        cells[i][t] = -1

    search(0, 1)
    if math.isinf(best[0]):
        return "infeasible", None
    return "optimal", best[0]
