"""Text serialization: snapshots, diagnostics CSV, sweep CSV.

All formats are plain text with 17-significant-digit floats, so every
float64 round-trips bitwise and output files diff cleanly. Schemas are
frozen; readers reject any column drift.
"""

from __future__ import annotations

import os

import numpy as np

from .coupled import DIAGNOSTIC_COLUMNS, Snapshot
from .errors import FormatError
from .limit import SWEEP_COLUMNS, SweepReport, SweepRow

__all__ = [
    "write_snapshot",
    "read_snapshot",
    "write_diagnostics",
    "read_diagnostics",
    "write_sweep",
    "read_sweep",
    "psi_companion_path",
]

SNAPSHOT_COLUMNS = ("x", "rho", "u", "eta", "p", "tau1")
_HEADER_KEYS = ("format_version", "time", "nx", "nq", "K", "gamma")
FORMAT_VERSION = 1


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def psi_companion_path(path) -> str:
    base, _ = os.path.splitext(os.fspath(path))
    return base + ".psi"


def write_snapshot(snap: Snapshot, path) -> None:
    """Write the physical-grid fields; psi_hat goes to a `.psi` companion."""
    lines = [
        f"# format_version = {snap.format_version}",
        f"# time = {_fmt(snap.time)}",
        f"# nx = {snap.nx}",
        f"# nq = {snap.nq}",
        f"# K = {snap.K}",
        f"# gamma = {_fmt(snap.gamma)}",
        ",".join(SNAPSHOT_COLUMNS),
    ]
    fields = [snap.x, snap.rho, snap.u, snap.eta, snap.p, snap.tau1]
    for i in range(snap.nx):
        lines.append(",".join(_fmt(f[i]) for f in fields))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    if snap.psi_hat is not None:
        _write_psi(snap, psi_companion_path(path))


def _write_psi(snap: Snapshot, path) -> None:
    vals = snap.psi_hat
    qshape = vals.shape[1:]
    qcols = ",".join(f"q_index_{i + 1}" for i in range(len(qshape)))
    lines = [
        f"# format_version = {snap.format_version}",
        f"# nx = {snap.nx}",
        f"# nq = {snap.nq}",
        f"# K = {snap.K}",
        f"x_index,{qcols},psi_hat",
    ]
    flat = vals.reshape(snap.nx, -1)
    for ix in range(snap.nx):
        for flat_q, v in enumerate(flat[ix]):
            qidx = np.unravel_index(flat_q, qshape)
            lines.append(",".join([str(ix), *map(str, qidx), _fmt(v)]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_header(lines, path, want_keys):
    meta = {}
    lineno = 0
    for lineno, line in enumerate(lines, start=1):
        if not line.startswith("#"):
            lineno -= 1
            break
        key, sep, val = line[1:].partition("=")
        if not sep:
            raise FormatError(f"{path}:{lineno}: malformed header line {line!r}")
        meta[key.strip()] = val.strip()
    else:
        raise FormatError(f"{path}:{lineno}: file ends inside the header")
    for key in want_keys:
        if key not in meta:
            raise FormatError(f"{path}:{lineno}: missing header key {key!r}")
    if meta["format_version"] != str(FORMAT_VERSION):
        raise FormatError(
            f"{path}:1: format_version {meta['format_version']!r} unsupported "
            f"(expected {FORMAT_VERSION})"
        )
    return meta, lineno


def read_snapshot(path) -> Snapshot:
    """Read a snapshot (and its `.psi` companion when present) bitwise."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    meta, nhead = _parse_header(lines, path, _HEADER_KEYS)
    try:
        nx = int(meta["nx"])
        nq = int(meta["nq"])
        K = int(meta["K"])
        time = float(meta["time"])
        gamma = float(meta["gamma"])
    except ValueError as exc:
        raise FormatError(f"{path}: bad header value: {exc}") from None
    if nhead >= len(lines):
        raise FormatError(f"{path}:{nhead + 1}: missing column header")
    colline = nhead + 1
    if lines[nhead] != ",".join(SNAPSHOT_COLUMNS):
        raise FormatError(
            f"{path}:{colline}: columns {lines[nhead]!r} do not match the frozen "
            f"schema {','.join(SNAPSHOT_COLUMNS)!r}"
        )
    body = lines[colline:]
    if len(body) < nx:
        raise FormatError(f"{path}:{colline + len(body)}: truncated body, "
                          f"expected {nx} rows, found {len(body)}")
    data = np.empty((nx, len(SNAPSHOT_COLUMNS)))
    for i in range(nx):
        parts = body[i].split(",")
        if len(parts) != len(SNAPSHOT_COLUMNS):
            raise FormatError(f"{path}:{colline + 1 + i}: expected "
                              f"{len(SNAPSHOT_COLUMNS)} fields, found {len(parts)}")
        try:
            data[i] = [float(p) for p in parts]
        except ValueError as exc:
            raise FormatError(f"{path}:{colline + 1 + i}: {exc}") from None
    psi = None
    companion = psi_companion_path(path)
    if os.path.exists(companion):
        psi = _read_psi(companion, nx, nq, K)
    return Snapshot(
        time=time, x=data[:, 0], rho=data[:, 1], u=data[:, 2], eta=data[:, 3],
        p=data[:, 4], tau1=data[:, 5], gamma=gamma, nx=nx, nq=nq, K=K, psi_hat=psi,
    )


def _read_psi(path, nx: int, nq: int, K: int) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    meta, nhead = _parse_header(lines, path, ("format_version", "nx", "nq", "K"))
    shape = (nx,) + (nq,) * K
    out = np.empty(shape)
    body = lines[nhead + 1:]
    want = nx * nq**K
    if len(body) < want:
        raise FormatError(f"{path}:{nhead + 1 + len(body)}: truncated body, "
                          f"expected {want} rows, found {len(body)}")
    for i in range(want):
        parts = body[i].split(",")
        if len(parts) != K + 2:
            raise FormatError(f"{path}:{nhead + 2 + i}: expected {K + 2} fields, "
                              f"found {len(parts)}")
        try:
            idx = tuple(int(p) for p in parts[:-1])
            out[idx] = float(parts[-1])
        except (ValueError, IndexError) as exc:
            raise FormatError(f"{path}:{nhead + 2 + i}: {exc}") from None
    return out


def write_diagnostics(rows: dict, path) -> None:
    """One row per completed step in the frozen diagnostics schema."""
    n = len(rows["step"])
    lines = [",".join(DIAGNOSTIC_COLUMNS)]
    for i in range(n):
        parts = [str(int(rows["step"][i]))]
        parts += [_fmt(rows[c][i]) for c in DIAGNOSTIC_COLUMNS[1:]]
        lines.append(",".join(parts))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_diagnostics(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError(f"{path}:1: empty diagnostics file")
    if lines[0] != ",".join(DIAGNOSTIC_COLUMNS):
        raise FormatError(f"{path}:1: columns {lines[0]!r} do not match the frozen "
                          f"schema {','.join(DIAGNOSTIC_COLUMNS)!r}")
    cols: dict[str, list] = {c: [] for c in DIAGNOSTIC_COLUMNS}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(DIAGNOSTIC_COLUMNS):
            raise FormatError(f"{path}:{lineno}: expected {len(DIAGNOSTIC_COLUMNS)} "
                              f"fields, found {len(parts)}")
        try:
            cols["step"].append(int(parts[0]))
            for name, val in zip(DIAGNOSTIC_COLUMNS[1:], parts[1:]):
                cols[name].append(float(val))
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from None
    return {name: np.asarray(vals) for name, vals in cols.items()}


def write_sweep(report: SweepReport, path) -> None:
    lines = [",".join(SWEEP_COLUMNS)]
    for row in report.rows:
        parts = [_fmt(getattr(row, c)) for c in SWEEP_COLUMNS[:-1]]
        parts.append(row.status)
        lines.append(",".join(parts))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_sweep(path) -> SweepReport:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError(f"{path}:1: empty sweep file")
    if lines[0] != ",".join(SWEEP_COLUMNS):
        raise FormatError(f"{path}:1: columns {lines[0]!r} do not match the frozen "
                          f"schema {','.join(SWEEP_COLUMNS)!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(SWEEP_COLUMNS):
            raise FormatError(f"{path}:{lineno}: expected {len(SWEEP_COLUMNS)} "
                              f"fields, found {len(parts)}")
        try:
            nums = [float(p) for p in parts[:-1]]
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from None
        rows.append(SweepRow(
            gamma=nums[0], excess_l1=nums[1], excess_l2=nums[2], excess_l4=nums[3],
            pressure_l1=nums[4], complementarity=nums[5], congestion_fraction=nums[6],
            max_rho=nums[7], status=parts[-1],
        ))
    return SweepReport(rows=tuple(rows))
