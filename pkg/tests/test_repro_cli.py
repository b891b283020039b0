"""Reproduction report assembly and the command-line front end."""

import csv
import math

import pytest

from avgcycles.cli import main, _parse_phi
from avgcycles.generators import gen_prop10, gen_prop12
from avgcycles.repro import Report, RunConfig, build_report


class TestRunConfig:
    def test_suite_validation(self):
        with pytest.raises(ValueError, match="unknown suite"):
            RunConfig(suite="th99")

    def test_desk_scale_guard(self):
        with pytest.raises(ValueError):
            RunConfig(max_n=9)
        with pytest.raises(ValueError):
            RunConfig(m_values=(5,))


@pytest.fixture(scope="module")
def report():
    return build_report(RunConfig(suite="th6", max_n=1, m_values=(0,), seed=3))


class TestReport:
    def test_rows_and_formula_sourced_counts(self, report):
        by_gen = {row.generator: row for row in report.rows}
        assert by_gen["gen_prop16"].expected == 1  # n^(m+1) at n=1, m=0
        assert by_gen["gen_prop18"].expected == 1  # (2n-1)^(m+1) at n=1
        assert all(row.passed for row in report.rows)

    def test_metadata_embeds_seed(self, report):
        assert report.metadata["seed"] == 3

    def test_csv_round_trip(self, report, tmp_path):
        path = tmp_path / "report.csv"
        report.write_csv(path)
        with open(path) as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        assert rows[0] == Report.HEADER
        assert len(rows) == len(report.rows) + 1

    def test_text_table_contains_rows(self, report):
        table = report.text_table()
        assert "gen_prop16" in table and "seed=3" in table

    def test_infeasible_row_is_reported_not_raised(self):
        report = build_report(RunConfig(suite="th7", max_n=2, m_values=(0,)))
        row = next(r for r in report.rows if r.generator == "gen_prop21" and r.n == 2)
        assert row.status == "infeasible"
        assert "even powers" in row.detail
        assert report.all_passed  # infeasible rows carry their diagnostic


@pytest.fixture(scope="module")
def spec_path(tmp_path_factory):
    d = tmp_path_factory.mktemp("spec")
    path = d / "spec.json"
    gen_prop10(1, 0, math.pi / 2).spec.save(path)
    return str(path)


class TestCli:
    def test_parse_phi(self):
        assert _parse_phi("pi") == math.pi
        assert _parse_phi("2pi") == 2 * math.pi
        assert _parse_phi("pi/3") == pytest.approx(math.pi / 3)
        assert _parse_phi("1.5") == 1.5

    def test_averaged(self, spec_path, tmp_path, capsys):
        code = main(["averaged", "--spec", spec_path, "--out-dir", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "averaged.txt").exists()
        assert (tmp_path / "averaged.json").exists()
        assert "f1_0" in capsys.readouterr().out

    def test_zeros(self, spec_path, tmp_path):
        code = main(["zeros", "--spec", spec_path, "--out-dir", str(tmp_path)])
        assert code == 0
        lines = (tmp_path / "zeros.csv").read_text().strip().splitlines()
        assert len(lines) == 2  # header + one zero

    def test_zeros_uses_second_order_when_f1_vanishes(self, tmp_path):
        path = tmp_path / "spec2.json"
        gen_prop12(1, 0, math.pi / 3).spec.save(path)
        code = main(["zeros", "--spec", str(path), "--out-dir", str(tmp_path)])
        assert code == 0
        lines = (tmp_path / "zeros.csv").read_text().strip().splitlines()
        assert len(lines) == 3  # header + two zeros

    def test_verify(self, spec_path, tmp_path, capsys):
        code = main(["verify", "--spec", spec_path, "--out-dir", str(tmp_path),
                     "--eps-sweep", "1e-2,5e-3"])
        assert code == 0
        assert (tmp_path / "cycles_0.csv").exists()
        assert "2/2 eps values verified" in capsys.readouterr().out

    def test_reproduce(self, tmp_path):
        code = main(["reproduce", "--suite", "th6", "--max-n", "1", "--m", "0",
                     "--out-dir", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "report.csv").exists()
        assert (tmp_path / "report.txt").exists()

    def test_missing_spec_file(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["averaged", "--spec", str(tmp_path / "nope.json"), "--out-dir", str(tmp_path)])

    def test_bad_box_rejected(self, spec_path, tmp_path):
        with pytest.raises(SystemExit):
            main(["zeros", "--spec", spec_path, "--box", "0.1:2.0,1.0",
                  "--out-dir", str(tmp_path)])
