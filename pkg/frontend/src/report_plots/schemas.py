"""Readers for the simulator's frozen plain-text formats.

The column tuples below are the wire contract with the simulator and must
match its writers byte for byte. Readers never modify the input files and
reject any drift with the offending path, line, and column names.
"""

from __future__ import annotations

import glob
import os

import numpy as np

from .errors import SchemaError

__all__ = [
    "SWEEP_COLUMNS",
    "DIAGNOSTIC_COLUMNS",
    "SNAPSHOT_COLUMNS",
    "read_sweep",
    "read_diagnostics",
    "read_snapshot",
    "latest_snapshot",
]

SWEEP_COLUMNS = (
    "gamma", "excess_l1", "excess_l2", "excess_l4", "pressure_l1",
    "complementarity", "congestion_fraction", "max_rho", "status",
)
DIAGNOSTIC_COLUMNS = (
    "step", "time", "mass_rho", "mass_psi", "mass_eta", "energy_total",
    "diss_total", "work", "sup_rho", "excess_l2", "complementarity",
    "eta_consistency_l1",
)
SNAPSHOT_COLUMNS = ("x", "rho", "u", "eta", "p", "tau1")
SNAPSHOT_FORMAT_VERSION = "1"


def _check_header(found: str, want, path, lineno: int) -> None:
    cols = found.split(",")
    if tuple(cols) == tuple(want):
        return
    missing = [c for c in want if c not in cols]
    extra = [c for c in cols if c not in want]
    bits = []
    if missing:
        bits.append("missing column " + ", ".join(repr(c) for c in missing))
    if extra:
        bits.append("unexpected column " + ", ".join(repr(c) for c in extra))
    if not bits:
        bits.append(f"column order {found!r} drifted from {','.join(want)!r}")
    raise SchemaError(f"{os.fspath(path)}:{lineno}: " + "; ".join(bits))


def _float_cell(text: str, path, lineno: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise SchemaError(
            f"{os.fspath(path)}:{lineno}: column {column!r} holds a "
            f"non-numeric value {text!r}"
        ) from None


def read_sweep(path) -> dict:
    """Sweep table as column arrays; `status` stays a list of strings."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise SchemaError(f"{os.fspath(path)}:1: empty file, expected the sweep header")
    _check_header(lines[0], SWEEP_COLUMNS, path, 1)
    cols: dict[str, list] = {c: [] for c in SWEEP_COLUMNS}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(SWEEP_COLUMNS):
            raise SchemaError(f"{os.fspath(path)}:{lineno}: expected "
                              f"{len(SWEEP_COLUMNS)} fields, found {len(parts)}")
        for name, cell in zip(SWEEP_COLUMNS[:-1], parts):
            cols[name].append(_float_cell(cell, path, lineno, name))
        cols["status"].append(parts[-1])
    out: dict = {c: np.asarray(cols[c]) for c in SWEEP_COLUMNS[:-1]}
    out["status"] = cols["status"]
    return out


def read_diagnostics(path) -> dict:
    """Per-step diagnostics as column arrays keyed by the frozen names."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise SchemaError(
            f"{os.fspath(path)}:1: empty file, expected the diagnostics header"
        )
    _check_header(lines[0], DIAGNOSTIC_COLUMNS, path, 1)
    cols: dict[str, list] = {c: [] for c in DIAGNOSTIC_COLUMNS}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(DIAGNOSTIC_COLUMNS):
            raise SchemaError(f"{os.fspath(path)}:{lineno}: expected "
                              f"{len(DIAGNOSTIC_COLUMNS)} fields, found {len(parts)}")
        for name, cell in zip(DIAGNOSTIC_COLUMNS, parts):
            cols[name].append(_float_cell(cell, path, lineno, name))
    return {c: np.asarray(vals) for c, vals in cols.items()}


def read_snapshot(path) -> dict:
    """Snapshot fields plus its `# key = value` header metadata."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    meta = {}
    nhead = 0
    for lineno, line in enumerate(lines, start=1):
        if not line.startswith("#"):
            nhead = lineno - 1
            break
        key, sep, val = line[1:].partition("=")
        if not sep:
            raise SchemaError(
                f"{os.fspath(path)}:{lineno}: malformed header line {line!r}"
            )
        meta[key.strip()] = val.strip()
    else:
        raise SchemaError(f"{os.fspath(path)}:{len(lines)}: file ends inside the header")
    if meta.get("format_version") != SNAPSHOT_FORMAT_VERSION:
        raise SchemaError(
            f"{os.fspath(path)}:1: format_version {meta.get('format_version')!r} "
            f"unsupported (expected {SNAPSHOT_FORMAT_VERSION})"
        )
    if nhead >= len(lines):
        raise SchemaError(f"{os.fspath(path)}:{nhead + 1}: missing column header")
    _check_header(lines[nhead], SNAPSHOT_COLUMNS, path, nhead + 1)
    data: dict[str, list] = {c: [] for c in SNAPSHOT_COLUMNS}
    for lineno, line in enumerate(lines[nhead + 1:], start=nhead + 2):
        parts = line.split(",")
        if len(parts) != len(SNAPSHOT_COLUMNS):
            raise SchemaError(f"{os.fspath(path)}:{lineno}: expected "
                              f"{len(SNAPSHOT_COLUMNS)} fields, found {len(parts)}")
        for name, cell in zip(SNAPSHOT_COLUMNS, parts):
            data[name].append(_float_cell(cell, path, lineno, name))
    out: dict = {c: np.asarray(vals) for c, vals in data.items()}
    out["meta"] = meta
    return out


def latest_snapshot(directory) -> str | None:
    """Path of the last snapshot in the directory, or None when empty."""
    paths = sorted(glob.glob(os.path.join(os.fspath(directory), "snapshot_*.csv")))
    return paths[-1] if paths else None
