"""CLI exit codes and outputs for both subcommands."""

import pytest

from report_plots.cli import main

from conftest import SWEEP_HEADER, sweep_text


class TestSweepCommand:
    def test_success(self, sweep_csv, tmp_path, capsys):
        out = tmp_path / "sweep.png"
        assert main(["sweep", str(sweep_csv), str(out)]) == 0
        assert "wrote" in capsys.readouterr().out
        assert out.exists()

    def test_pnorm_flag(self, sweep_csv, tmp_path, capsys):
        out = tmp_path / "sweep.png"
        assert main(["sweep", str(sweep_csv), str(out), "--p-norms", "2,4"]) == 0
        capsys.readouterr()
        assert out.exists()

    def test_schema_violation(self, tmp_path, capsys):
        path = tmp_path / "sweep.csv"
        path.write_text(sweep_text().replace("excess_l4", "excess_l3"))
        rc = main(["sweep", str(path), str(tmp_path / "o.png")])
        assert rc == 1
        err = capsys.readouterr().err
        assert "error:" in err and "excess_l4" in err

    def test_empty_input(self, tmp_path, capsys):
        path = tmp_path / "sweep.csv"
        path.write_text(SWEEP_HEADER + "\n")
        assert main(["sweep", str(path), str(tmp_path / "o.png")]) == 1
        assert "no sweep rows" in capsys.readouterr().err

    def test_bad_pnorms(self, sweep_csv, tmp_path, capsys):
        rc = main(["sweep", str(sweep_csv), str(tmp_path / "o.png"),
                   "--p-norms", "3"])
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        rc = main(["sweep", str(tmp_path / "nope.csv"), str(tmp_path / "o.png")])
        assert rc == 2
        assert "error:" in capsys.readouterr().err


class TestRunCommand:
    def test_success(self, diag_csv, snap_dir, tmp_path, capsys):
        out = tmp_path / "figs"
        rc = main(["run", str(diag_csv), str(snap_dir), str(out)])
        assert rc == 0
        stdout = capsys.readouterr().out
        assert stdout.count("wrote") == 2
        assert (out / "energy.png").exists()
        assert (out / "profiles.png").exists()

    def test_delta_flag(self, diag_csv, snap_dir, tmp_path, capsys):
        out = tmp_path / "figs"
        rc = main(["run", str(diag_csv), str(snap_dir), str(out),
                   "--delta", "0.2"])
        assert rc == 0
        capsys.readouterr()

    def test_bad_delta(self, diag_csv, snap_dir, tmp_path, capsys):
        rc = main(["run", str(diag_csv), str(snap_dir), str(tmp_path / "f"),
                   "--delta", "2.0"])
        assert rc == 1
        assert "delta" in capsys.readouterr().err

    def test_no_command(self, capsys):
        assert main([]) == 1
        capsys.readouterr()

    def test_help(self, capsys):
        assert main(["--help"]) == 0
        assert "sweep" in capsys.readouterr().out
