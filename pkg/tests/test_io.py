"""Instance and solution document round trips."""

import pytest

from fmplan.core import InstanceError, Solution
from fmplan.generate import GenConfig, generate_instance
from fmplan.io import (
    dumps_instance,
    loads_instance,
    solution_from_jsonable,
    solution_to_csv,
    solution_to_jsonable,
)
from fmplan.reduction import fis_to_fmp, FisInstance, FisTask
from fmplan.validate import derive_usage

from conftest import random_grid, random_tiny_instance, rng_for


class TestInstanceDocuments:
    @pytest.mark.parametrize("seed", [0, 3, 9])
    def test_round_trip_identity(self, seed):
        inst = generate_instance(GenConfig(seed=seed, num_periods=30))
        text = dumps_instance(inst)
        again = loads_instance(text)
        assert again == inst
        assert dumps_instance(again) == text

    def test_reduction_flag_round_trips(self):
        fis = FisInstance(
            tasks=(FisTask("p1", 1, 3),),
            employees=("e1",),
            eligible={"p1": frozenset({"e1"})},
        )
        inst = fis_to_fmp(fis)
        again = loads_instance(dumps_instance(inst))
        assert again.reduction_instance
        assert again == inst

    def test_wrong_format_rejected(self):
        with pytest.raises(InstanceError, match="format"):
            loads_instance('{"format": "something-else", "version": 1}')


class TestSolutionDocuments:
    def test_round_trip_with_ledgers(self):
        rng = rng_for(5)
        inst = random_tiny_instance(rng)
        sol = random_grid(inst, rng)
        derive_usage(inst, sol)
        doc = solution_to_jsonable(inst, sol)
        again = solution_from_jsonable(doc, inst)
        assert again.grid == sol.grid
        assert again.u == sol.u
        assert again.rft == sol.rft
        assert again.rct == sol.rct

    def test_fleet_mismatch_rejected(self):
        rng = rng_for(6)
        inst = random_tiny_instance(rng)
        other = random_tiny_instance(rng_for(777))
        sol = Solution.empty(inst)
        doc = solution_to_jsonable(inst, sol)
        if [a.id for a in other.fleet] != [a.id for a in inst.fleet]:
            with pytest.raises(InstanceError):
                solution_from_jsonable(doc, other)

    def test_csv_flat_export(self):
        rng = rng_for(7)
        inst = random_tiny_instance(rng)
        sol = derive_usage(inst, Solution.empty(inst))
        text = solution_to_csv(inst, sol)
        lines = text.strip().splitlines()
        assert lines[0] == "aircraft,period,state,u,rft,rct"
        assert len(lines) == 1 + len(inst.fleet) * inst.horizon
