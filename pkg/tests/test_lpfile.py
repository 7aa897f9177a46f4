"""LP text emission and parsing."""

import math

import pytest

from fmplan.generate import GenConfig, generate_instance
from fmplan.lpfile import LpParseError, emit_lp, parse_lp
from fmplan.mip import MatrixModel, build_model, fix_initial_conditions, model_stats


def toy_model():
    m = MatrixModel()
    x = m.add_var("x1", "binary", 0, 1, ("x", -1, 1, 0))
    y = m.add_var("y1", "continuous", 0, 12.5, ("x", -1, 1, 1))
    m.objective = [(x, 1.0), (y, -0.25)]
    m.add_row("r_a", [(x, 2.0), (y, 1.0)], "<=", 10.0)
    m.add_row("r_b", [(y, 1.0)], ">=", 0.5)
    return m


class TestEmit:
    def test_empty_model(self):
        text = emit_lp(MatrixModel())
        assert "Minimize" in text and "Subject To" in text and text.rstrip().endswith("End")

    def test_deterministic_output(self):
        assert emit_lp(toy_model()) == emit_lp(toy_model())

    def test_sections_present(self):
        text = emit_lp(toy_model())
        assert "Binaries" in text and "Bounds" in text
        assert "r_a:" in text and "<= 10" in text


class TestRoundTrip:
    def test_toy_round_trip_exact(self):
        model = toy_model()
        parsed = parse_lp(emit_lp(model))
        assert model_stats(parsed) == model_stats(model)
        by_name = {v.name: v for v in parsed.variables}
        for v in model.variables:
            assert by_name[v.name].kind == v.kind
            assert by_name[v.name].lb == v.lb and by_name[v.name].ub == v.ub
        assert [r.name for r in parsed.rows] == [r.name for r in model.rows]
        for r_old, r_new in zip(model.rows, parsed.rows):
            old = {model.variables[c].name: v for c, v in r_old.coeffs}
            new = {parsed.variables[c].name: v for c, v in r_new.coeffs}
            assert old == new
            assert (r_old.sense, r_old.rhs) == (r_new.sense, r_new.rhs)

    def test_full_model_round_trip(self):
        inst = generate_instance(GenConfig(seed=11, num_periods=30))
        model = fix_initial_conditions(build_model(inst), inst)
        parsed = parse_lp(emit_lp(model))
        assert model_stats(parsed) == model_stats(model)
        for r_old, r_new in zip(model.rows, parsed.rows):
            old = {model.variables[c].name: v for c, v in r_old.coeffs}
            new = {parsed.variables[c].name: v for c, v in r_new.coeffs}
            assert old == new and r_old.rhs == r_new.rhs and r_old.sense == r_new.sense

    def test_reparse_is_stable(self):
        text = emit_lp(toy_model())
        assert emit_lp(parse_lp(text)) == text


class TestParse:
    def test_comments_and_blank_lines_ignored(self):
        text = (
            "\\ a comment line\n"
            "Minimize\n obj: x + 2 y\n\n"
            "Subject To\n"
            "\\ another comment\n"
            " c1: x + y <= 4\n\n"
            "End\n"
        )
        model = parse_lp(text)
        assert len(model.rows) == 1
        assert len(model.variables) == 2

    def test_malformed_sense_reports_location(self):
        text = "Minimize\n obj: x\nSubject To\n c1: x ?? 4\nEnd\n"
        with pytest.raises(LpParseError) as err:
            parse_lp(text)
        assert "line 4" in str(err.value)

    def test_signs_and_defaults(self):
        model = parse_lp(
            "Minimize\n obj: - x + 3.5 y - 2 z\n"
            "Subject To\n c: x - y >= -2\n"
            "Bounds\n -1 <= z <= 1\n x free\n"
            "End\n"
        )
        coefs = {model.variables[c].name: v for c, v in model.objective}
        assert coefs == {"x": -1.0, "y": 3.5, "z": -2.0}
        assert model.rows[0].rhs == -2.0
        z = model.variables[model.var_index["z"]]
        assert (z.lb, z.ub) == (-1.0, 1.0)
        x = model.variables[model.var_index["x"]]
        assert x.lb == -math.inf and x.ub == math.inf

    def test_binary_section_sets_kind(self):
        model = parse_lp(
            "Minimize\n obj: x\nSubject To\n c: x + y <= 1\nBinaries\n x\nEnd\n"
        )
        assert model.variables[model.var_index["x"]].kind == "binary"
        assert model.variables[model.var_index["x"]].ub == 1.0
        assert model.variables[model.var_index["y"]].kind == "continuous"

    def test_unsupported_section_rejected(self):
        with pytest.raises(LpParseError, match="unsupported"):
            parse_lp("Minimize\n obj: x\nSubject To\n c: x <= 1\nGenerals\n x\nEnd\n")

    def test_maximize_negates(self):
        model = parse_lp("Maximize\n obj: 2 x\nSubject To\n c: x <= 1\nEnd\n")
        assert model.objective[0][1] == -2.0
