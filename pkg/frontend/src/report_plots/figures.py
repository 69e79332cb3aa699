"""Figure rendering from validated simulator outputs.

All numbers come straight from the CSVs; this layer only draws them. PNG
and SVG outputs carry no timestamps or tool-version metadata, so rerunning
on the same inputs reproduces the image files byte for byte.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
# SVG element ids are salted per process by default; pin the salt so
# reruns reproduce identical bytes.
matplotlib.rcParams["svg.hashsalt"] = "report-plots"

import matplotlib.pyplot as plt
import numpy as np

from .errors import EmptyInput
from .schemas import latest_snapshot, read_diagnostics, read_snapshot, read_sweep

__all__ = ["FigureSpec", "plot_sweep", "plot_run"]

_ALLOWED_P = (1, 2, 4)


@dataclass(frozen=True)
class FigureSpec:
    """Rendering knobs: which excess norms to draw and the shading width.

    delta sets the near-congested band {rho > 1 - delta} shaded in the
    profile figure; dpi applies to raster outputs.
    """

    p_norms: tuple[int, ...] = (1, 2, 4)
    delta: float = 0.01
    dpi: int = 150

    def __post_init__(self):
        if not self.p_norms or any(p not in _ALLOWED_P for p in self.p_norms):
            raise ValueError(
                f"p_norms must be a nonempty subset of {_ALLOWED_P}, got {self.p_norms}"
            )
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.dpi < 10:
            raise ValueError(f"dpi too small: {self.dpi}")


def _save(fig, path, spec: FigureSpec) -> None:
    path = os.fspath(path)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    ext = os.path.splitext(path)[1].lower()
    metadata = None
    if ext == ".png":
        metadata = {"Software": None}
    elif ext == ".svg":
        metadata = {"Date": None}
    fig.savefig(path, dpi=spec.dpi, metadata=metadata)
    plt.close(fig)


def plot_sweep(sweep_csv, out_image, spec: FigureSpec = FigureSpec()) -> str:
    """Log-log decay of the excess norms and complementarity over gamma.

    One series per requested p-norm plus the complementarity residual;
    single-row inputs still show their markers. Returns the image path.
    """
    cols = read_sweep(sweep_csv)
    gammas = cols["gamma"]
    if gammas.size == 0:
        raise EmptyInput(f"{os.fspath(sweep_csv)}: no sweep rows to plot")

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for p in spec.p_norms:
        ax.loglog(gammas, cols[f"excess_l{p}"], marker="o",
                  label=f"excess $L^{p}$")
    ax.loglog(gammas, cols["complementarity"], marker="s", linestyle="--",
              color="black", label="complementarity")
    ax.set_xlabel(r"$\gamma$")
    ax.set_ylabel("limit indicator")
    ax.set_title("stiff-pressure limit indicators")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _save(fig, out_image, spec)
    return os.fspath(out_image)


def _shade_congested(ax, x, rho, delta: float) -> None:
    """Shade each contiguous run of cells with rho > 1 - delta."""
    mask = rho > 1.0 - delta
    if not mask.any():
        return
    edges = np.flatnonzero(np.diff(mask.astype(int)))
    starts = [0] if mask[0] else []
    starts += [int(i) + 1 for i in edges if not mask[i]]
    ends = [int(i) for i in edges if mask[i]]
    if mask[-1]:
        ends.append(mask.size - 1)
    for lo, hi in zip(starts, ends):
        ax.axvspan(x[lo], x[hi], color="0.85", zorder=0)


def plot_run(diagnostics_csv, snapshots_dir, out_dir,
             spec: FigureSpec = FigureSpec()) -> list[str]:
    """Energy/dissipation time series plus final-profile panels.

    Writes energy.png always; profiles.png only when the snapshot directory
    holds at least one snapshot (otherwise a warning is issued and the time
    series still renders). Returns the written paths.
    """
    cols = read_diagnostics(diagnostics_csv)
    if cols["step"].size == 0:
        raise EmptyInput(f"{os.fspath(diagnostics_csv)}: no diagnostics rows to plot")
    os.makedirs(out_dir, exist_ok=True)
    written = []

    t = cols["time"]
    fig, (ax_e, ax_d) = plt.subplots(2, 1, figsize=(6.0, 6.0), sharex=True)
    ax_e.plot(t, cols["energy_total"], color="tab:blue", label="total energy")
    ax_e.set_ylabel("energy")
    ax_e.grid(True, alpha=0.3)
    ax_e.legend()
    ax_d.plot(t, cols["diss_total"], color="tab:red", label="dissipation")
    if np.any(cols["work"] != 0.0):
        ax_d.plot(t, cols["work"], color="tab:green", linestyle="--",
                  label="forcing power")
    ax_d.set_xlabel("time")
    ax_d.set_ylabel("rate")
    ax_d.grid(True, alpha=0.3)
    ax_d.legend()
    fig.tight_layout()
    energy_path = os.path.join(os.fspath(out_dir), "energy.png")
    _save(fig, energy_path, spec)
    written.append(energy_path)

    snap_path = latest_snapshot(snapshots_dir)
    if snap_path is None:
        warnings.warn(f"{os.fspath(snapshots_dir)}: no snapshots found, "
                      "profile figure skipped")
        return written

    snap = read_snapshot(snap_path)
    x = snap["x"]
    fig, axes = plt.subplots(3, 1, figsize=(6.0, 7.5), sharex=True)
    ax_rho, ax_eta, ax_p = axes
    _shade_congested(ax_rho, x, snap["rho"], spec.delta)
    ax_rho.plot(x, snap["rho"], color="tab:blue")
    ax_rho.axhline(1.0, color="black", linestyle=":", linewidth=0.8)
    ax_rho.set_ylabel(r"$\rho$")
    ax_rho.set_title(f"final profiles (t = {snap['meta'].get('time', '?')}, "
                     f"shaded: $\\rho > 1 - {spec.delta:g}$)")
    ax_eta.plot(x, snap["eta"], color="tab:orange")
    ax_eta.set_ylabel(r"$\eta$")
    ax_p.plot(x, snap["p"], color="tab:red")
    ax_p.set_ylabel("p")
    ax_p.set_xlabel("x")
    for ax in axes:
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    profile_path = os.path.join(os.fspath(out_dir), "profiles.png")
    _save(fig, profile_path, spec)
    written.append(profile_path)
    return written
