import csv
import json
import os

import pytest

from cort.cli import main
from cort.tree_code import load_profile


def run(tmp_path, *argv):
    return main(["--results-dir", str(tmp_path / "results"), *argv])


class TestBoundCommand:
    def test_pure_profile(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = run(tmp_path, "bound", "--profile", "pure", "--n", "16",
                   "--k", "8", "--p", "0.05", "--gamma", "1", "--limit",
                   "1024", "--out", str(out))
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["d_e_g"] == doc["d_cle_g"] + doc["d_cfe_g"]
        assert "rcu_exact" in doc and "gallager_reference" in doc
        assert "d_cle_g" in capsys.readouterr().out

    def test_missing_p_is_usage_error(self, tmp_path, capsys):
        code = run(tmp_path, "bound", "--profile", "pure", "--n", "8", "--k", "4")
        assert code != 0
        assert "error" in capsys.readouterr().err

    def test_unreadable_profile(self, tmp_path, capsys):
        code = run(tmp_path, "bound", "--profile", str(tmp_path / "nope.json"),
                   "--p", "0.05")
        assert code != 0

    def test_grid_refinement(self, tmp_path):
        values = {}
        for points in (10, 100):
            out = tmp_path / f"r{points}.json"
            assert run(tmp_path, "bound", "--profile", "pure", "--n", "32",
                       "--k", "16", "--p", "0.04", "--limit", "1e6",
                       "--grid-points", str(points), "--out", str(out)) == 0
            values[points] = json.loads(out.read_text())["d_e_g"]
        assert values[100] <= values[10]

    def test_writes_run_record(self, tmp_path):
        assert run(tmp_path, "bound", "--profile", "pure", "--n", "8",
                   "--k", "4", "--p", "0.1") == 0
        records = list((tmp_path / "results" / "bound").iterdir())
        assert len(records) == 1
        doc = json.loads((records[0] / "record.json").read_text())
        assert doc["command"] == "bound"
        assert doc["parameters"]["p"] == 0.1


class TestSbpCommand:
    def test_emits_profile_and_trace(self, tmp_path):
        prof_path = tmp_path / "profile.json"
        trace_path = tmp_path / "trace.json"
        code = run(tmp_path, "sbp", "--n", "12", "--k", "4", "--p", "0.05",
                   "--limit", "128", "--out-profile", str(prof_path),
                   "--out-trace", str(trace_path))
        assert code == 0
        prof = load_profile(prof_path)
        assert prof.n == 12 and prof.k == 4
        trace = json.loads(trace_path.read_text())
        assert len(trace["steps"]) == 3

    def test_huge_budget_concentrates(self, tmp_path):
        prof_path = tmp_path / "profile.json"
        assert run(tmp_path, "sbp", "--n", "12", "--k", "6", "--p", "0.05",
                   "--limit", str(2 ** 62), "--out-profile", str(prof_path)) == 0
        assert load_profile(prof_path).s[0] == 6

    def test_reruns_bit_identical(self, tmp_path):
        paths = []
        for tag in ("a", "b"):
            p = tmp_path / f"{tag}.json"
            assert run(tmp_path, "sbp", "--n", "10", "--k", "3", "--p", "0.08",
                       "--gamma", "0.9992", "--limit", "64",
                       "--out-profile", str(p)) == 0
            paths.append(p.read_bytes())
        assert paths[0] == paths[1]


class TestSimulateCommand:
    def test_smoke_and_csv(self, tmp_path):
        out = tmp_path / "stats.json"
        code = run(tmp_path, "simulate", "--profile", "pure", "--n", "8",
                   "--k", "3", "--p", "0.05", "--limit", "64", "--trials",
                   "200", "--seed", "1", "--threads", "1", "--out", str(out))
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["trials"] == 200
        csv_path = tmp_path / "results" / "simulate.csv"
        with open(csv_path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0][0] == "n" and len(rows) == 2

    def test_zero_trials_usage_error(self, tmp_path, capsys):
        code = run(tmp_path, "simulate", "--profile", "pure", "--n", "8",
                   "--k", "3", "--p", "0.05", "--trials", "0")
        assert code != 0
        assert "trials" in capsys.readouterr().err

    def test_infeasible_limit_reports_memory(self, tmp_path, capsys):
        code = run(tmp_path, "simulate", "--profile", "pure", "--n", "8",
                   "--k", "3", "--p", "0.05", "--trials", "10",
                   "--limit", "1000000000")
        assert code != 0
        assert "GB" in capsys.readouterr().err

    def test_trace_jsonl(self, tmp_path):
        trace = tmp_path / "trace.jsonl"
        code = run(tmp_path, "simulate", "--profile", "pure", "--n", "8",
                   "--k", "3", "--p", "0.05", "--limit", "64", "--trials",
                   "5", "--seed", "2", "--threads", "1",
                   "--trace-jsonl", str(trace))
        assert code == 0
        records = [json.loads(line) for line in trace.read_text().splitlines()]
        assert records
        assert {"iteration", "prefix", "stage", "cost", "nodes_checked"} \
            <= set(records[0])
        assert records[0]["iteration"] == 1

    def test_determinism(self, tmp_path):
        docs = []
        for tag in ("a", "b"):
            out = tmp_path / f"{tag}.json"
            assert run(tmp_path, "simulate", "--profile", "pure", "--n", "8",
                       "--k", "3", "--p", "0.05", "--limit", "64", "--trials",
                       "150", "--seed", "42", "--threads", "2",
                       "--out", str(out)) == 0
            docs.append(out.read_bytes())
        assert docs[0] == docs[1]


class TestTablesCommand:
    def test_single_table_csv(self, tmp_path):
        out = tmp_path / "table1.csv"
        code = run(tmp_path, "tables", "--paper-table", "1", "--out", str(out))
        assert code == 0
        with open(out) as fh:
            rows = list(csv.reader(fh))
        assert rows[0][:10] == ["n", "k", "p", "gamma", "L", "d_cle_g",
                                "d_cfe_g", "d_e_g", "varrho", "rho"]
        assert rows[0][10:] == ["printed_d_cle_g", "printed_d_cfe_g",
                                "printed_d_e_g", "printed_additive_consistent"]
        assert len(rows) == 4
        for row in rows[1:]:
            assert float(row[7]) == float(row[5]) + float(row[6])


class TestValidationLeavesNoPartialFiles:
    def test_failed_run_writes_nothing(self, tmp_path):
        out = tmp_path / "report.json"
        code = run(tmp_path, "bound", "--profile", "pure", "--n", "8",
                   "--k", "4", "--p", "0.9", "--out", str(out))
        assert code != 0
        assert not out.exists()
        assert not (tmp_path / "results").exists()
