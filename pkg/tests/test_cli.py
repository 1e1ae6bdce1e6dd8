"""Command-line interface: subcommands, outputs and exit codes."""

import os

import pytest

from dmmlab.cli import main


def run_cli(*argv):
    return main(list(argv))


class TestAnalytic:
    def test_radius_sweep_writes_csv(self, tmp_path, capsys):
        code = run_cli("analytic", "--sweep", "mix_zone_radius=1000:6000:1000",
                       "--metric", "latency", "--out", str(tmp_path))
        assert code == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out[0].endswith("analytic_mix_zone_radius.csv")
        text = open(out[0], encoding="utf-8").read()
        assert text.count("\n") == 19  # header + 18 rows

    def test_plot_flag_renders_svg(self, tmp_path, capsys):
        code = run_cli("analytic", "--sweep", "mean_speed=10,20",
                       "--metric", "latency", "--plot",
                       "--out", str(tmp_path))
        assert code == 0
        svgs = [f for f in os.listdir(tmp_path) if f.endswith(".svg")]
        assert svgs == ["analytic_mean_speed_latency.svg"]

    def test_scenario_applied(self, tmp_path, capsys):
        scen = tmp_path / "s.cfg"
        scen.write_text("v_mean = 0\n")
        code = run_cli("analytic", "--metric", "failure_prob",
                       "--scenario", str(scen), "--out", str(tmp_path))
        assert code == 0
        path = capsys.readouterr().out.strip().splitlines()[0]
        rows = open(path, encoding="utf-8").read().splitlines()[1:]
        assert all(",0.0," in r for r in rows)  # parked user never fails

    def test_bad_scenario_exits_2(self, tmp_path, capsys):
        scen = tmp_path / "s.cfg"
        scen.write_text("p_f = 1.5\n")
        assert run_cli("analytic", "--scenario", str(scen),
                       "--out", str(tmp_path)) == 2

    def test_bad_sweep_exits_1(self, tmp_path):
        assert run_cli("analytic", "--sweep", "nonsense",
                       "--out", str(tmp_path)) == 1

    def test_unknown_scheme_exits_1(self, tmp_path):
        assert run_cli("analytic", "--scheme", "xyz",
                       "--out", str(tmp_path)) == 1

    def test_usage_error_exits_1(self, capsys):
        with pytest.raises(SystemExit) as err:
            run_cli("not-a-command")
        assert err.value.code == 1


class TestSimulate:
    def test_point_run_both_mode(self, tmp_path, capsys):
        scen = tmp_path / "s.cfg"
        scen.write_text("v_mean = 100\nsession_packet_rate = 1\np_f = 0\n")
        code = run_cli("simulate", "--scenario", str(scen),
                       "--scheme", "re-fdmm", "--metric", "latency",
                       "--duration", "400", "--out", str(tmp_path))
        assert code == 0
        path = capsys.readouterr().out.strip().splitlines()[0]
        rows = open(path, encoding="utf-8").read().splitlines()
        assert len(rows) == 2
        # both-mode fills analytic and simulated columns with zero error
        cells = rows[1].split(",")
        assert cells[4] and cells[5]
        assert float(cells[8]) == 0.0

    def test_trace_files_written(self, tmp_path, capsys):
        scen = tmp_path / "s.cfg"
        scen.write_text("v_mean = 100\nsession_packet_rate = 1\n")
        code = run_cli("simulate", "--scenario", str(scen),
                       "--scheme", "ddmm", "--metric", "latency",
                       "--duration", "120", "--trace", "--out",
                       str(tmp_path))
        assert code == 0
        traces = [f for f in os.listdir(tmp_path) if f.startswith("trace_")]
        assert traces == ["trace_ddmm_point_s1.tsv"]


class TestPlotAndReport:
    def test_plot_from_csv(self, tmp_path, capsys):
        assert run_cli("analytic", "--sweep", "network_scale=0.1,0.5,1.0",
                       "--metric", "signaling_cost",
                       "--out", str(tmp_path)) == 0
        csv_path = capsys.readouterr().out.strip().splitlines()[0]
        assert run_cli("plot", "--table", csv_path,
                       "--out", str(tmp_path)) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out and all(p.endswith(".svg") for p in out)

    def test_plot_missing_table_exits_1(self, tmp_path):
        assert run_cli("plot", "--table", str(tmp_path / "nope.csv")) == 1

    def test_report_runs_matching_checks(self, tmp_path, capsys):
        assert run_cli("analytic", "--sweep", "network_scale=0.1:1.0:0.1",
                       "--metric", "signaling_cost",
                       "--out", str(tmp_path)) == 0
        csv_path = capsys.readouterr().out.strip().splitlines()[0]
        code = run_cli("report", csv_path)
        out = capsys.readouterr().out
        assert code == 0
        assert "PASS" in out and "FAIL" not in out

    def test_report_failure_exits_3_and_names_check(self, tmp_path, capsys):
        from dmmlab.figures import STUDIES
        from dmmlab.sweeps import run_sweep, write_csv
        table = run_sweep(STUDIES["radius_latency_recovery"].spec)
        for row in table.rows:  # doctor the table so the ordering breaks
            if str(row.scheme) == "pre-fdmm" and row.metric == "latency":
                row.analytic = 9.9
        bad = tmp_path / "doctored.csv"
        bad.write_text(write_csv(table), encoding="utf-8")
        code = run_cli("report", str(bad))
        out = capsys.readouterr().out
        assert code == 3
        assert "FAIL" in out and "ordering" in out

    def test_report_without_applicable_checks(self, tmp_path, capsys):
        assert run_cli("analytic", "--sweep", "max_pause=10,20",
                       "--metric", "latency", "--out", str(tmp_path)) == 0
        csv_path = capsys.readouterr().out.strip().splitlines()[0]
        assert run_cli("report", csv_path) == 0
        assert "no checks applicable" in capsys.readouterr().out


class TestFigures:
    def test_full_suite(self, tmp_path, capsys):
        code = run_cli("figures", "--out", str(tmp_path))
        out = capsys.readouterr().out
        assert code == 0, out
        files = os.listdir(tmp_path)
        assert "report.txt" in files
        csvs = [f for f in files if f.endswith(".csv")]
        svgs = [f for f in files if f.endswith(".svg")]
        assert len(csvs) == 9  # one table per study
        assert len(svgs) >= 9
        assert "FAIL" not in open(tmp_path / "report.txt").read()
