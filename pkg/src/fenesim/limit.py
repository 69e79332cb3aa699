"""Stiff-pressure limit diagnostics and the exponent sweep driver.

As gamma grows, the pressure rho^gamma turns into a barrier at the
congestion threshold rho* (default 1): the excess (rho/rho* - 1)_+ is driven
to zero while the pressure mass stays bounded. The sweep runs one coupled
simulation per exponent on identical initial data and reports the limit
indicators per row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import RunConfig, config_grid, initial_profiles
from .errors import FenesimError, ValidationError
from .grid import Grid1D

__all__ = [
    "CongestionField",
    "SweepRow",
    "SweepReport",
    "excess_norm",
    "complementarity_residual",
    "congestion_fraction",
    "gamma_sweep",
    "SWEEP_COLUMNS",
]

SWEEP_COLUMNS = (
    "gamma", "excess_l1", "excess_l2", "excess_l4", "pressure_l1",
    "complementarity", "congestion_fraction", "max_rho", "status",
)


@dataclass(frozen=True)
class CongestionField:
    """Congestion threshold rho*(x); scalar or one value per cell."""

    threshold: float | np.ndarray = 1.0

    def __post_init__(self):
        t = np.asarray(self.threshold, dtype=float)
        if np.any(t <= 0.0) or not np.all(np.isfinite(t)):
            raise ValidationError(
                ["limit.threshold: congestion threshold must be positive and finite"]
            )

    def resolve(self, grid: Grid1D) -> np.ndarray:
        t = np.asarray(self.threshold, dtype=float)
        if t.ndim == 0:
            return np.full(grid.nx, float(t))
        grid.check_field(t, "threshold")
        return t


def _relative(rho: np.ndarray, threshold) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    if threshold is None:
        return rho
    t = threshold.threshold if isinstance(threshold, CongestionField) else threshold
    return rho / np.asarray(t, dtype=float)


def excess_norm(rho: np.ndarray, p: float, grid: Grid1D, threshold=None) -> float:
    """L^p norm of (rho/rho* - 1)_+; p = inf gives the sup of the excess."""
    if not p >= 1:
        raise ValidationError([f"limit.p: norm exponent must be >= 1, got {p}"])
    excess = np.maximum(_relative(rho, threshold) - 1.0, 0.0)
    if math.isinf(p):
        return float(excess.max())
    return float(grid.integrate(excess**p) ** (1.0 / p))


def complementarity_residual(rho: np.ndarray, gamma: float, grid: Grid1D,
                             threshold=None) -> float:
    """int (rho/rho*)^gamma |rho/rho* - 1| dx; zero iff pressure sits only
    where the density equals the threshold (or vanishes)."""
    rel = _relative(rho, threshold)
    with np.errstate(over="ignore"):
        return float(grid.integrate(rel**gamma * np.abs(rel - 1.0)))


def congestion_fraction(rho: np.ndarray, grid: Grid1D, delta: float = 0.01,
                        threshold=None) -> float:
    """Volume fraction of the near-congested set {rho/rho* > 1 - delta}."""
    rel = _relative(rho, threshold)
    return float(np.count_nonzero(rel > 1.0 - delta)) / grid.nx


@dataclass(frozen=True)
class SweepRow:
    """One exponent's limit indicators; status records per-run failures."""

    gamma: float
    excess_l1: float
    excess_l2: float
    excess_l4: float
    pressure_l1: float
    complementarity: float
    congestion_fraction: float
    max_rho: float
    status: str = "ok"


@dataclass(frozen=True)
class SweepReport:
    """Rows sorted by ascending gamma plus the consecutive decay ratios."""

    rows: tuple[SweepRow, ...]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def ok_rows(self) -> tuple[SweepRow, ...]:
        return tuple(r for r in self.rows if r.status == "ok")

    def decay_ratios(self, field_name: str = "excess_l2") -> np.ndarray:
        """ratio[i] = value at gamma_{i+1} / value at gamma_i over ok rows."""
        vals = np.array([getattr(r, field_name) for r in self.ok_rows()])
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(vals[:-1] > 0.0, vals[1:] / vals[:-1], np.nan)


def _initial_pressure_budget(cfg: RunConfig, gammas) -> list[str]:
    """Growth guard: int rho0^gamma dx must stay O(gamma) along the ladder,
    which holds exactly when the initial density does not exceed the
    threshold; a super-threshold rho0 blows through every budget."""
    grid = config_grid(cfg)
    rho0, _ = initial_profiles(cfg)
    rel = rho0 / cfg.rho_star
    errs = []
    budget_scale = 2.0 * max(cfg.length, 1.0)
    for g in gammas:
        mass = float(grid.integrate(rel**g))
        if mass > budget_scale * g:
            errs.append(
                f"initial.rho0: int (rho0/rho*)^gamma dx = {mass:.3g} at gamma={g:g} "
                f"exceeds the growth budget {budget_scale * g:.3g}; the initial "
                "density must not exceed the congestion threshold"
            )
    return errs


def gamma_sweep(base_config: RunConfig, gammas=None) -> SweepReport:
    """Run the coupled simulation once per exponent on shared initial data.

    Individual run failures are recorded in the row's status as
    `failed:<ErrorName>` with NaN indicators, and the sweep continues.
    """
    from .coupled import run  # deferred: coupled imports this module's norms

    cfg = base_config
    gammas = tuple(float(g) for g in (cfg.gammas if gammas is None else gammas))
    errs = []
    if not gammas:
        errs.append("sweep.gammas: need at least one exponent")
    if any(not g > 1.5 for g in gammas):
        errs.append(f"sweep.gammas: every exponent must exceed 3/2, got {gammas}")
    if any(b <= a for a, b in zip(gammas, gammas[1:])):
        errs.append(f"sweep.gammas: exponents must be strictly ascending, got {gammas}")
    if not cfg.T > 0:
        errs.append("run.T: the sweep needs a positive final time")
    if not errs:
        errs.extend(_initial_pressure_budget(cfg, gammas))
    if errs:
        raise ValidationError(errs)

    rows = []
    for g in gammas:
        run_cfg = replace(cfg, gamma=g)
        try:
            result = run(run_cfg)
        except FenesimError as exc:
            rows.append(SweepRow(
                gamma=g, excess_l1=math.nan, excess_l2=math.nan, excess_l4=math.nan,
                pressure_l1=math.nan, complementarity=math.nan,
                congestion_fraction=math.nan, max_rho=math.nan,
                status=f"failed:{type(exc).__name__}",
            ))
            continue
        grid = result.final.fluid.grid
        rho = result.final.fluid.rho
        threshold = cfg.rho_star
        rows.append(SweepRow(
            gamma=g,
            excess_l1=excess_norm(rho, 1, grid, threshold),
            excess_l2=excess_norm(rho, 2, grid, threshold),
            excess_l4=excess_norm(rho, 4, grid, threshold),
            pressure_l1=result.pressure_time_integral / cfg.T,
            complementarity=result.complementarity_time_integral,
            congestion_fraction=congestion_fraction(rho, grid, cfg.delta, threshold),
            max_rho=result.sup_rho,
        ))
    return SweepReport(rows=tuple(rows))
