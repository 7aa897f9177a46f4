"""Domain types, window arithmetic, and index-set derivation."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fmplan.core import (
    Aircraft,
    Instance,
    InstanceError,
    Mission,
    Params,
    Solution,
    derive_index_sets,
    initial_window_sets,
    min_assign_window,
    window_sets,
)

from conftest import random_tiny_instance, rng_for


def make_params(**kw):
    defaults = dict(
        num_periods=90,
        check_duration=6,
        capacity=3,
        calendar_max=60,
        calendar_min=30,
        flight_max=1000.0,
        default_usage=0.0,
    )
    defaults.update(kw)
    return Params(**defaults)


class TestWindowSets:
    def test_occupancy_window_mid_horizon(self):
        ts, _, _ = window_sets(10, make_params())
        assert list(ts) == list(range(5, 11))

    def test_occupancy_window_clipped_at_start(self):
        ts, _, _ = window_sets(1, make_params())
        assert list(ts) == [1]

    def test_no_restart_and_forced_windows(self):
        # Evaluated by hand: {10..min(90, 10+6+30-1)} and the forced window
        # is suppressed because 10 > 90 - 60 - 6.
        _, tm, tM = window_sets(10, make_params())
        assert list(tm) == list(range(10, 46))
        assert len(tM) == 0

    def test_forced_window_emitted_early(self):
        # Members filtered to t' <= 120 - 60 - 6: {45..75} becomes {45..54}.
        _, _, tM = window_sets(10, make_params(num_periods=120))
        assert list(tM) == list(range(45, 55))

    def test_out_of_range_period(self):
        with pytest.raises(ValueError):
            window_sets(0, make_params())
        with pytest.raises(ValueError):
            window_sets(91, make_params())

    def test_occupancy_window_size(self):
        p = make_params()
        for t in range(1, 91):
            ts, _, _ = window_sets(t, p)
            assert len(ts) == min(6, t)

    def test_window_monotone(self):
        p = make_params()
        tops = [max(window_sets(t, p)[0]) for t in range(1, 91)]
        assert tops == sorted(tops) and len(set(tops)) == 90

    def test_zero_duration_checks_make_empty_windows(self):
        p = make_params(check_duration=0, calendar_max=0, calendar_min=0)
        ts, tm, _ = window_sets(5, p)
        assert len(ts) == 0 and len(tm) == 0


class TestInitialWindows:
    def test_standard_budget(self):
        a = Aircraft(id="A1", atype="y", rct_init=40)
        barred, forced = initial_window_sets(a, make_params())
        assert list(barred) == list(range(1, 11))
        assert list(forced) == list(range(10, 41))

    def test_exhausted_budget_forces_immediate_start(self):
        a = Aircraft(id="A1", atype="y", rct_init=0)
        barred, forced = initial_window_sets(a, make_params())
        assert len(barred) == 0
        assert list(forced) == [1]

    def test_budget_beyond_horizon_forces_nothing(self):
        p = make_params(num_periods=4, check_duration=0, calendar_max=0, calendar_min=0)
        a = Aircraft(id="A1", atype="y", rct_init=5)
        barred, forced = initial_window_sets(a, p)
        assert len(forced) == 0
        assert list(barred) == [1, 2, 3, 4]

    def test_known_check_shifts_windows(self):
        # Mid-check aircraft: budgets anchor at the check's completion.
        a = Aircraft(id="A1", atype="y", rct_init=60, in_maint_remaining=3, rft_init=900)
        barred, forced = initial_window_sets(a, make_params(num_periods=120))
        assert list(barred) == list(range(1, 34))  # 3 + 30
        assert list(forced) == list(range(33, 64))  # {3+30 .. 3+60}


class TestMinAssignWindow:
    def _instance(self, mt, start=1, end=30):
        params = make_params(num_periods=30)
        mission = Mission(
            id="J1", start=start, end=end, hours=10, required=1, min_assign=mt, mtype="y"
        )
        fleet = (Aircraft(id="A1", atype="y", rft_init=100, rct_init=20),)
        return Instance(params=params, missions=(mission,), fleet=fleet)

    def test_window_spans_parameter_plus_one(self):
        inst = self._instance(6)
        assert list(min_assign_window("J1", 20, inst)) == list(range(14, 21))

    def test_clipped_at_horizon_start(self):
        inst = self._instance(2)
        assert list(min_assign_window("J1", 1, inst)) == [1]

    def test_exact_fit(self):
        inst = self._instance(3)
        assert list(min_assign_window("J1", 3, inst)) == [1, 2, 3]

    def test_out_of_window_period(self):
        inst = self._instance(2, start=5, end=10)
        with pytest.raises(ValueError):
            min_assign_window("J1", 4, inst)


class TestIndexSets:
    def test_type_matching(self):
        params = make_params(num_periods=10)
        mission = Mission(id="J1", start=1, end=5, hours=1, required=1, min_assign=1, mtype="a")
        fleet = tuple(
            [Aircraft(id=f"A{i}", atype="a", rct_init=5) for i in range(3)]
            + [Aircraft(id=f"B{i}", atype="b", rct_init=5) for i in range(2)]
        )
        inst = Instance(params=params, missions=(mission,), fleet=fleet)
        assert inst.sets.eligible[0] == (0, 1, 2)

    def test_standard_matching(self):
        params = make_params(num_periods=10)
        mission = Mission(
            id="J1", start=1, end=5, hours=1, required=1, min_assign=1, mtype="a", standard="s1"
        )
        fleet = (
            Aircraft(id="A1", atype="a", standards=frozenset({"s1", "s2"}), rct_init=5),
            Aircraft(id="A2", atype="a", rct_init=5),
        )
        inst = Instance(params=params, missions=(mission,), fleet=fleet)
        assert inst.sets.eligible[0] == (0,)

    def test_empty_mission_list(self):
        inst = Instance(params=make_params(num_periods=10), missions=(), fleet=(Aircraft(id="A1", atype="a", rct_init=4),))
        assert all(not row for row in inst.sets.active_at)

    def test_unknown_type_is_structural_error(self):
        params = make_params(num_periods=10)
        mission = Mission(id="J1", start=1, end=5, hours=1, required=1, min_assign=1, mtype="zz")
        with pytest.raises(InstanceError):
            Instance(params=params, missions=(mission,), fleet=(Aircraft(id="A1", atype="a", rct_init=4),))

    def test_inverse_map_property(self):
        for seed in range(25):
            inst = random_tiny_instance(rng_for(seed))
            sets = inst.sets
            for i in range(len(inst.fleet)):
                expect = tuple(j for j in range(len(inst.missions)) if i in sets.eligible[j])
                assert sets.missions_of[i] == expect

    def test_pure_function_of_instance(self):
        inst = random_tiny_instance(rng_for(7))
        again = derive_index_sets(inst)
        assert again.eligible == inst.sets.eligible
        assert again.active_at == inst.sets.active_at


class TestInvariants:
    def test_params_rejects_bad_windows(self):
        with pytest.raises(InstanceError):
            make_params(calendar_min=70)

    def test_mission_rejects_bad_min_assign(self):
        with pytest.raises(InstanceError):
            Mission(id="J1", start=1, end=3, hours=1, required=1, min_assign=4, mtype="y")

    def test_aircraft_in_check_excludes_preassignment(self):
        with pytest.raises(InstanceError):
            Aircraft(id="A1", atype="y", in_maint_remaining=2, preassigned=("J1", 0))

    def test_rct_cap_enforced_except_for_reduction_images(self):
        params = make_params(num_periods=10, calendar_max=6, calendar_min=3)
        bad = Aircraft(id="A1", atype="y", rct_init=11)
        with pytest.raises(InstanceError):
            Instance(params=params, missions=(), fleet=(bad,))
        ok = Instance(params=params, missions=(), fleet=(bad,), reduction_instance=True)
        assert ok.fleet[0].rct_init == 11

    @settings(max_examples=60, deadline=None)
    @given(m=st.integers(0, 5), t=st.integers(1, 40), horizon=st.integers(40, 80))
    def test_occupancy_window_always_min_m_t(self, m, t, horizon):
        p = make_params(
            num_periods=horizon, check_duration=m, calendar_max=10, calendar_min=2
        )
        ts, _, _ = window_sets(t, p)
        assert len(ts) == min(m, t)


class TestSolutionStructure:
    def test_empty_solution_carries_known_prefix(self):
        inst = Instance(
            params=make_params(num_periods=8, capacity=1, in_maintenance=(1, 1)),
            missions=(),
            fleet=(
                Aircraft(id="A1", atype="y", rct_init=50, rft_init=900, in_maint_remaining=2),
            ),
        )
        sol = Solution.empty(inst)
        assert sol.grid[0][1:3] == ["M", "M"]
        sol.validate_structure(inst)

    def test_stray_check_body_rejected(self):
        inst = Instance(
            params=make_params(num_periods=8),
            missions=(),
            fleet=(Aircraft(id="A1", atype="y", rct_init=50),),
        )
        sol = Solution.empty(inst)
        sol.grid[0][4] = "M"
        with pytest.raises(Exception):
            sol.validate_structure(inst)

    def test_mission_cell_must_be_eligible(self):
        params = make_params(num_periods=8)
        mission = Mission(id="J1", start=2, end=5, hours=1, required=1, min_assign=1, mtype="y")
        inst = Instance(
            params=params,
            missions=(mission,),
            fleet=(Aircraft(id="A1", atype="y", rct_init=50),),
        )
        sol = Solution.empty(inst)
        sol.grid[0][6] = "J1"  # outside the mission window
        with pytest.raises(Exception):
            sol.validate_structure(inst)
