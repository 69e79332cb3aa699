"""Acceptance gate: figures from real simulator output.

Drives the installed fenesim CLI to produce genuine sweep and run CSVs,
then checks the three plotting guarantees: every figure renders with exit
code 0, a schema-mutated CSV is rejected with the drifted column named,
and reruns reproduce identical bytes. One [PASS]/[FAIL] line per clause.

Skipped wholesale when fenesim is not on PATH so this suite stays
runnable on its own.
"""

import shutil
import subprocess

import pytest

from report_plots.cli import main

FENESIM = shutil.which("fenesim")

pytestmark = pytest.mark.skipif(FENESIM is None,
                                reason="fenesim CLI not installed")

CONFIG = """\
grid.nx = 16
spring.nq = 6
kinetic.epsilon = 0.01
fluid.mu_b = 0.1
stress.k = 0.5
fluid.xi = 0.5
initial.preset = perturbed
initial.amp_rho = 0.05
initial.amp_u = 0.1
initial.amp_psi = 0.2
run.T = 0.02
run.snapshot_every = 5
sweep.gammas = 2,4
"""


def emit(capsys, ok, label, detail):
    with capsys.disabled():
        print(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    assert ok, f"{label}: {detail}"


@pytest.fixture(scope="module")
def sim_output(tmp_path_factory):
    base = tmp_path_factory.mktemp("simdata")
    cfg = base / "case.cfg"
    cfg.write_text(CONFIG)
    run_dir = base / "run"
    sweep_dir = base / "sweep"
    for cmd in (
        [FENESIM, "run", "--config", str(cfg), "--out", str(run_dir)],
        [FENESIM, "sweep", "--config", str(cfg), "--out", str(sweep_dir)],
    ):
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, f"{cmd[1]} failed:\n{proc.stderr}"
    return run_dir, sweep_dir / "sweep.csv"


def test_plot_generation(sim_output, tmp_path, capsys):
    run_dir, sweep_csv = sim_output
    diag_csv = run_dir / "diagnostics.csv"

    first = tmp_path / "first"
    first.mkdir()
    rc_sweep = main(["sweep", str(sweep_csv), str(first / "sweep.png")])
    rc_run = main(["run", str(diag_csv), str(run_dir), str(first / "figs")])
    capsys.readouterr()
    figures = sorted(p.name for p in (first / "figs").glob("*.png"))
    ok = (rc_sweep == 0 and rc_run == 0
          and (first / "sweep.png").stat().st_size > 1000
          and figures == ["energy.png", "profiles.png"])
    emit(capsys, ok, "plot generation (figures)",
         f"exit sweep={rc_sweep} run={rc_run}, wrote sweep.png "
         + " ".join(figures))

    mutated = tmp_path / "mutated.csv"
    mutated.write_text(
        sweep_csv.read_text().replace("complementarity", "complement"))
    rc_bad = main(["sweep", str(mutated), str(tmp_path / "bad.png")])
    err = capsys.readouterr().err
    ok = (rc_bad == 1 and "complementarity" in err
          and not (tmp_path / "bad.png").exists())
    emit(capsys, ok, "plot generation (schema rejection)",
         f"mutated header exits {rc_bad} and names the missing column")

    second = tmp_path / "second"
    second.mkdir()
    assert main(["sweep", str(sweep_csv), str(second / "sweep.png")]) == 0
    assert main(["run", str(diag_csv), str(run_dir), str(second / "figs")]) == 0
    capsys.readouterr()
    pairs = [("sweep.png", first / "sweep.png", second / "sweep.png")]
    pairs += [(name, first / "figs" / name, second / "figs" / name)
              for name in figures]
    stale = [name for name, a, b in pairs
             if a.read_bytes() != b.read_bytes()]
    emit(capsys, not stale, "plot generation (idempotent reruns)",
         f"{len(pairs)} images byte-identical across reruns"
         + (f" except {stale}" if stale else ""))
