"""Synthetic files in the simulator's frozen formats for frontend tests."""

import pytest

SWEEP_HEADER = ("gamma,excess_l1,excess_l2,excess_l4,pressure_l1,"
                "complementarity,congestion_fraction,max_rho,status")
DIAG_HEADER = ("step,time,mass_rho,mass_psi,mass_eta,energy_total,diss_total,"
               "work,sup_rho,excess_l2,complementarity,eta_consistency_l1")


def sweep_text(rows=3):
    lines = [SWEEP_HEADER]
    vals = [(5.0, 0.04), (10.0, 0.02), (20.0, 0.009), (40.0, 0.004)][:rows]
    for g, e in vals:
        lines.append(f"{g},{e * 2},{e},{e / 2},0.9,{e / 10},0.25,1.05,ok")
    return "\n".join(lines) + "\n"


def diag_text(n=5):
    lines = [DIAG_HEADER]
    for i in range(1, n + 1):
        t = 0.01 * i
        lines.append(f"{i},{t},0.8,1,1,{1.0 - 0.01 * i},{0.5 - 0.02 * i},0,"
                     f"0.85,0.01,0.001,0.0002")
    return "\n".join(lines) + "\n"


def snapshot_text(nx=8, congested=True):
    peak = 0.999 if congested else 0.9
    lines = [
        "# format_version = 1",
        "# time = 0.5",
        f"# nx = {nx}",
        "# nq = 6",
        "# K = 1",
        "# gamma = 20",
        "x,rho,u,eta,p,tau1",
    ]
    for i in range(nx):
        x = (i + 0.5) / nx
        rho = peak if nx // 4 <= i < 3 * nx // 4 else 0.7
        lines.append(f"{x},{rho},0.1,0.8,{rho ** 20},-0.05")
    return "\n".join(lines) + "\n"


@pytest.fixture
def sweep_csv(tmp_path):
    path = tmp_path / "sweep.csv"
    path.write_text(sweep_text())
    return path


@pytest.fixture
def diag_csv(tmp_path):
    path = tmp_path / "diagnostics.csv"
    path.write_text(diag_text())
    return path


@pytest.fixture
def snap_dir(tmp_path):
    d = tmp_path / "snaps"
    d.mkdir()
    (d / "snapshot_0000.csv").write_text(snapshot_text(congested=False))
    (d / "snapshot_0001.csv").write_text(snapshot_text(congested=True))
    return d
