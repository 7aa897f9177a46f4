"""Usage derivation, constraint checking, objectives, and the tiny oracle."""

import pytest

from fmplan.core import (
    Aircraft,
    CHECK_BODY,
    CHECK_START,
    Instance,
    Mission,
    Params,
    Solution,
)
from fmplan.validate import (
    OBJ_CHECKS,
    OBJ_CHECKS_RFT,
    brute_force_solve,
    check_solution,
    derive_usage,
    objective,
)

from conftest import random_grid, random_tiny_instance, rng_for


def one_aircraft_instance(horizon=12, missions=(), capacity=1, h_max=1000.0, u_min=0.0,
                          rct=None, rft=None, m=6, e_max=60, e_min=30, n_aircraft=1):
    if rct is None:
        rct = e_max
    if rft is None:
        rft = h_max
    fleet = tuple(
        Aircraft(id=f"A{i+1}", atype="y", rft_init=rft, rct_init=rct)
        for i in range(n_aircraft)
    )
    params = Params(
        num_periods=horizon,
        check_duration=m,
        capacity=capacity,
        calendar_max=e_max,
        calendar_min=e_min,
        flight_max=h_max,
        default_usage=u_min,
    )
    return Instance(params=params, missions=tuple(missions), fleet=fleet)


class TestDeriveUsage:
    def test_idle_aircraft_without_default_usage(self):
        inst = one_aircraft_instance(horizon=8, rct=60, rft=700.0)
        sol = derive_usage(inst, Solution.empty(inst))
        assert all(sol.u[0][t] == 0.0 for t in range(1, 9))
        assert all(sol.rft[0][t] == 700.0 for t in range(0, 9))

    def test_mission_consumption_recurrence(self):
        mission = Mission(id="J1", start=1, end=4, hours=50.0, required=1, min_assign=1, mtype="y")
        inst = one_aircraft_instance(horizon=6, missions=[mission], rft=1000.0)
        sol = Solution.empty(inst)
        for t in range(1, 5):
            sol.grid[0][t] = "J1"
        derive_usage(inst, sol)
        assert [sol.rft[0][t] for t in range(1, 5)] == [950.0, 900.0, 850.0, 800.0]

    def test_check_pins_flight_budget(self):
        inst = one_aircraft_instance(horizon=12, rct=10, rft=400.0)
        sol = Solution.empty(inst)
        sol.grid[0][5] = CHECK_START
        for t in range(6, 11):
            sol.grid[0][t] = CHECK_BODY
        derive_usage(inst, sol)
        assert all(sol.rft[0][t] == 1000.0 for t in range(5, 11))
        assert sol.rft[0][4] == 400.0
        # Calendar ledger resets too.
        assert sol.rct[0][10] == 60.0
        assert sol.rct[0][11] == 59.0

    def test_default_usage_applies_only_when_serviceable(self):
        inst = one_aircraft_instance(horizon=10, u_min=5.0, rct=30, rft=500.0)
        sol = Solution.empty(inst)
        sol.grid[0][2] = CHECK_START
        for t in range(3, 8):
            sol.grid[0][t] = CHECK_BODY
        derive_usage(inst, sol)
        assert sol.u[0][1] == 5.0
        assert all(sol.u[0][t] == 0.0 for t in range(2, 8))
        assert sol.u[0][8] == 5.0


class TestCheckSolution:
    def test_unserved_mission_flagged_every_period(self):
        mission = Mission(id="J1", start=2, end=5, hours=10.0, required=2, min_assign=1, mtype="y")
        inst = one_aircraft_instance(horizon=8, missions=[mission], n_aircraft=3)
        report = check_solution(inst, Solution.empty(inst))
        entries = [v for v in report.entries if v.family == "MissionReq"]
        assert [v.period for v in entries] == [2, 3, 4, 5]
        assert all(v.magnitude == 2.0 for v in entries)

    def test_capacity_excess_magnitude(self):
        inst = one_aircraft_instance(horizon=10, n_aircraft=3, capacity=2, m=6, rct=60)
        sol = Solution.empty(inst)
        for i in range(3):
            sol.grid[i][2] = CHECK_START
            for t in range(3, 8):
                sol.grid[i][t] = CHECK_BODY
        report = check_solution(inst, sol)
        caps = [v for v in report.entries if v.family == "Capacity"]
        assert caps and all(v.magnitude == 1.0 for v in caps)

    def test_check_spacing_violation(self):
        # Two starts 20 periods apart with a 6+30-period exclusion window.
        inst = one_aircraft_instance(horizon=40, rct=20, m=6, e_max=60, e_min=30)
        sol = Solution.empty(inst)
        for t0 in (5, 25):
            sol.grid[0][t0] = CHECK_START
            for t in range(t0 + 1, t0 + 6):
                sol.grid[0][t] = CHECK_BODY
        report = check_solution(inst, sol)
        assert any(v.family == "Calendar" for v in report.entries)

    def test_feasible_empty_report(self):
        inst = one_aircraft_instance(horizon=6, rct=60)
        report = check_solution(inst, Solution.empty(inst))
        assert report.feasible and report.entries == []


class TestObjective:
    def test_plain_check_count_and_final_state(self):
        inst = one_aircraft_instance(horizon=4, n_aircraft=3, rct=60, rft=1000.0)
        sol = derive_usage(inst, Solution.empty(inst))
        assert objective(inst, sol, OBJ_CHECKS) == 0.0
        assert objective(inst, sol, OBJ_CHECKS_RFT) == -3000.0

    def test_combined_objective_arithmetic(self):
        inst = one_aircraft_instance(horizon=12, n_aircraft=2, rct=12, rft=900.0, e_max=12, e_min=0)
        sol = Solution.empty(inst)
        for i in range(2):
            sol.grid[i][1] = CHECK_START
            for t in range(2, 7):
                sol.grid[i][t] = CHECK_BODY
        derive_usage(inst, sol)
        # 2 checks * 1000 - (1000 + 1000) at the horizon end.
        assert objective(inst, sol, OBJ_CHECKS) == 2.0
        assert objective(inst, sol, OBJ_CHECKS_RFT) == 0.0

    def test_check_count_ignores_ledgers(self):
        inst = one_aircraft_instance(horizon=4, rct=60, rft=123.0)
        sol = derive_usage(inst, Solution.empty(inst))
        before = objective(inst, sol, OBJ_CHECKS)
        sol.rft = [[0.0] * 5]
        assert objective(inst, sol, OBJ_CHECKS) == before


class TestBruteForce:
    def test_zero_mission_budget_beyond_horizon(self):
        params = Params(
            num_periods=4, check_duration=0, capacity=1,
            calendar_max=0, calendar_min=0, flight_max=0.0, default_usage=0.0,
        )
        inst = Instance(
            params=params,
            missions=(),
            fleet=(Aircraft(id="A1", atype="y", rct_init=5),),
            reduction_instance=True,
        )
        result = brute_force_solve(inst)
        assert result.status == "optimal" and result.value == 0.0

    def test_forced_check_costs_one(self):
        inst = one_aircraft_instance(horizon=6, m=2, e_max=5, e_min=1, rct=3)
        result = brute_force_solve(inst)
        assert result.status == "optimal" and result.value >= 1.0
        report = check_solution(inst, result.solution)
        assert report.feasible

    def test_size_guard(self):
        inst = one_aircraft_instance(horizon=20)
        with pytest.raises(ValueError, match="too large"):
            brute_force_solve(inst)

    @pytest.mark.parametrize("seed", range(12))
    def test_optimal_solutions_validate(self, seed):
        inst = random_tiny_instance(rng_for(3000 + seed), max_periods=5)
        result = brute_force_solve(inst)
        if result.status == "optimal":
            assert check_solution(inst, result.solution).feasible
            assert objective(inst, result.solution, OBJ_CHECKS) == result.value


class TestPerturbation:
    def test_single_cell_flip_detected(self):
        # Flipping any cell of a feasible solution breaks feasibility or
        # moves the objective.
        rng = rng_for(42)
        tested = 0
        for seed in range(60):
            inst = random_tiny_instance(rng_for(500 + seed), max_periods=5)
            result = brute_force_solve(inst)
            if result.status != "optimal":
                continue
            base_obj = objective(inst, result.solution, OBJ_CHECKS_RFT)
            for _ in range(10):
                sol = result.solution.copy()
                i = int(rng.integers(0, len(inst.fleet)))
                t = int(rng.integers(1, inst.horizon + 1))
                cell = sol.grid[i][t]
                options = [c for c in ("", CHECK_START) if c != cell]
                js = [
                    inst.missions[j].id
                    for j in inst.sets.active_at[t]
                    if i in inst.sets.eligible[j] and inst.missions[j].id != cell
                ]
                options.extend(js)
                new_cell = options[int(rng.integers(0, len(options)))]
                if cell == CHECK_BODY or new_cell == cell:
                    continue
                sol.grid[i][t] = new_cell
                try:
                    sol_d = derive_usage(inst, sol.copy())
                except Exception:
                    continue  # structurally unrepresentable flip
                report = check_solution(inst, sol_d)
                changed = objective(inst, sol_d, OBJ_CHECKS_RFT) != base_obj
                assert (not report.feasible) or changed
                tested += 1
            if tested >= 80:
                break
        assert tested >= 40
