from __future__ import annotations

import io
import json

import pytest

from hetprice.cli import main

from conftest import DATA


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], stdout=out)
    return code, json.loads(out.getvalue())


class TestExitCodes:
    def test_garp_consistent_consumer(self):
        code, report = run("garp", "--panel", DATA / "cobb_douglas_panel.json", "--consumer", 1)
        assert code == 0
        assert report["schema"] == 1

    def test_one_good_refute(self):
        code, report = run("one-good-refute", "--panel", DATA / "worked_example.json", "--good", 1)
        assert code == 1
        assert report["verdicts"]["one_good"]["method"] == "interval"

    def test_two_good_prices_command(self):
        code, report = run("prop1", "--panel", DATA / "worked_example.json", "--aggregator", "arithmetic")
        assert code == 0
        assert report["certificates"]["prices"]
        assert report["verdicts"]["pooled_garp"]["satisfied"]
        assert all(b["holds"] for b in report["bound_log"])

    def test_stable_scaling_violation_witness(self):
        code, report = run("prop4", "--panel", DATA / "violation_panel.json")
        assert code == 1
        assert report["verdicts"]["precondition"]["witness"]

    def test_rum_refuted(self):
        code, _ = run("rum", "--cross-section", DATA / "crossing_unsortable.json")
        assert code == 1

    def test_rpm_certificate(self):
        code, report = run("rpm", "--cross-section", DATA / "crossing_sortable.json")
        assert code == 0
        assert report["certificates"]["rpm"]["mean_scale"] == "1"

    def test_search_budget(self):
        code, report = run("rum", "--cross-section", DATA / "crossing_unsortable.json", "--search-budget", 0)
        assert code == 2
        assert "unknown" in report["verdicts"]

    def test_patches(self):
        code, report = run("patches", "--budgets", DATA / "crossing_budgets.json")
        assert code == 0 and report["verdicts"]["patch_count"] == 5

    def test_unknown_command(self):
        code, report = run("frobnicate")
        assert code == 3
        assert report["error"]["type"] == "InputError"

    def test_missing_file(self, tmp_path):
        code, report = run("garp", "--panel", tmp_path / "absent.json")
        assert code == 3 and "error" in report

    def test_bad_document(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"goods": 2}')
        code, report = run("garp", "--panel", bad)
        assert code == 3
        assert report["error"]["type"] == "SchemaError"

    def test_missing_flag(self):
        code, _ = run("prop4")
        assert code == 3


class TestReports:
    @pytest.mark.parametrize("argv", [
        ("prop4", "--panel", DATA / "cobb_douglas_panel.json", "--scale-set", "1,2"),
        ("prop6", "--panel", DATA / "cobb_douglas_panel.json", "--phi", "reference:max1"),
        ("prop3-check", "--panel", DATA / "cobb_douglas_panel.json", "--seed", 4),
        ("synth", "--spec", DATA / "synth_spec.json"),
    ])
    def test_byte_stable(self, argv):
        a, b = io.StringIO(), io.StringIO()
        main([str(v) for v in argv], stdout=a)
        main([str(v) for v in argv], stdout=b)
        assert a.getvalue() == b.getvalue()

    def test_threads_do_not_change_output(self):
        base = ("prop4", "--panel", DATA / "cobb_douglas_panel.json")
        assert run(*base)[1] == run(*base, "--threads", 4)[1]

    def test_timing_opt_in(self):
        _, report = run("garp", "--panel", DATA / "cobb_douglas_panel.json")
        assert "wall_clock_seconds" not in report
        _, report = run("garp", "--panel", DATA / "cobb_douglas_panel.json", "--timing")
        assert report["wall_clock_seconds"] >= 0

    def test_synth_out_is_loadable(self, tmp_path):
        out = tmp_path / "panel.json"
        code, report = run("synth", "--family", "leontief", "--N", 2, "--T", 3, "--K", 2, "--out", out)
        assert code == 0
        code, _ = run("garp", "--panel", out)
        assert code == 0

    def test_digest_tracks_input(self, tmp_path):
        _, a = run("garp", "--panel", DATA / "cobb_douglas_panel.json")
        _, b = run("garp", "--panel", DATA / "worked_example.json")
        assert a["input_digest"] != b["input_digest"]

    def test_disaggregation_command(self):
        code, report = run("prop2", "--disaggregation", DATA / "disaggregation_example.json")
        assert code == 0
        assert report["verdicts"]["demands_sum_to_aggregate"]
