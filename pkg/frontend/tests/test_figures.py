"""Rendering tests: files produced, idempotent bytes, inputs untouched."""

import pytest

from report_plots.errors import EmptyInput
from report_plots.figures import FigureSpec, plot_run, plot_sweep

from conftest import SWEEP_HEADER, DIAG_HEADER, sweep_text


class TestFigureSpec:
    def test_rejects_bad_pnorm(self):
        with pytest.raises(ValueError):
            FigureSpec(p_norms=(3,))
        with pytest.raises(ValueError):
            FigureSpec(p_norms=())

    def test_rejects_bad_delta(self):
        with pytest.raises(ValueError):
            FigureSpec(delta=0.0)
        with pytest.raises(ValueError):
            FigureSpec(delta=1.5)

    def test_defaults(self):
        spec = FigureSpec()
        assert spec.p_norms == (1, 2, 4)
        assert spec.delta == 0.01


class TestPlotSweep:
    def test_writes_image(self, sweep_csv, tmp_path):
        out = tmp_path / "sweep.png"
        assert plot_sweep(sweep_csv, out) == str(out)
        assert out.exists() and out.stat().st_size > 1000

    def test_idempotent_bytes(self, sweep_csv, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        plot_sweep(sweep_csv, a)
        plot_sweep(sweep_csv, b)
        assert a.read_bytes() == b.read_bytes()
        plot_sweep(sweep_csv, a)  # overwrite in place stays stable
        assert a.read_bytes() == b.read_bytes()

    def test_never_mutates_input(self, sweep_csv, tmp_path):
        before = sweep_csv.read_bytes()
        plot_sweep(sweep_csv, tmp_path / "out.png")
        assert sweep_csv.read_bytes() == before

    def test_single_row(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text(sweep_text(rows=1))
        out = tmp_path / "one.png"
        plot_sweep(path, out)
        assert out.stat().st_size > 1000

    def test_empty_rows(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text(SWEEP_HEADER + "\n")
        with pytest.raises(EmptyInput):
            plot_sweep(path, tmp_path / "never.png")
        assert not (tmp_path / "never.png").exists()

    def test_pnorm_subset(self, sweep_csv, tmp_path):
        out = tmp_path / "l2only.png"
        plot_sweep(sweep_csv, out, FigureSpec(p_norms=(2,)))
        assert out.exists()

    def test_svg_idempotent(self, sweep_csv, tmp_path):
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        plot_sweep(sweep_csv, a)
        plot_sweep(sweep_csv, b)
        assert a.read_bytes() == b.read_bytes()

    def test_creates_parent_dirs(self, sweep_csv, tmp_path):
        out = tmp_path / "fresh" / "nested" / "sweep.png"
        plot_sweep(sweep_csv, out)
        assert out.exists()


class TestPlotRun:
    def test_writes_both_figures(self, diag_csv, snap_dir, tmp_path):
        out = tmp_path / "figs"
        written = plot_run(diag_csv, snap_dir, out)
        assert [p.rsplit("/", 1)[-1] for p in written] == ["energy.png",
                                                           "profiles.png"]
        for p in written:
            assert (out / p.rsplit("/", 1)[-1]).stat().st_size > 1000

    def test_idempotent_bytes(self, diag_csv, snap_dir, tmp_path):
        out1, out2 = tmp_path / "f1", tmp_path / "f2"
        plot_run(diag_csv, snap_dir, out1)
        plot_run(diag_csv, snap_dir, out2)
        for name in ("energy.png", "profiles.png"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_empty_snapshot_dir_warns(self, diag_csv, tmp_path):
        empty = tmp_path / "nosnaps"
        empty.mkdir()
        out = tmp_path / "figs"
        with pytest.warns(UserWarning, match="skipped"):
            written = plot_run(diag_csv, empty, out)
        assert len(written) == 1
        assert (out / "energy.png").exists()
        assert not (out / "profiles.png").exists()

    def test_empty_diagnostics(self, snap_dir, tmp_path):
        path = tmp_path / "diag.csv"
        path.write_text(DIAG_HEADER + "\n")
        with pytest.raises(EmptyInput):
            plot_run(path, snap_dir, tmp_path / "figs")

    def test_never_mutates_inputs(self, diag_csv, snap_dir, tmp_path):
        before_diag = diag_csv.read_bytes()
        snaps = sorted(snap_dir.glob("*.csv"))
        before_snaps = [p.read_bytes() for p in snaps]
        plot_run(diag_csv, snap_dir, tmp_path / "figs")
        assert diag_csv.read_bytes() == before_diag
        assert [p.read_bytes() for p in snaps] == before_snaps

    def test_uncongested_snapshot_renders(self, diag_csv, tmp_path):
        from conftest import snapshot_text
        d = tmp_path / "snaps"
        d.mkdir()
        (d / "snapshot_0000.csv").write_text(snapshot_text(congested=False))
        written = plot_run(diag_csv, d, tmp_path / "figs")
        assert len(written) == 2
