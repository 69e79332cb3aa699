"""Compressible isentropic fluid solver with polymer coupling terms.

Momentum carries the grouped pressure gradient grad(p + xi eta^2), the
divergence of the polymer stress tau_1, a body force, and the Newtonian
stress S = mu_s (D(u) - (1/d) div u I) + mu_b div u I. In d=1 the deviatoric
shear part vanishes identically, so all physical-space dissipation comes
through mu_b; runs that want viscosity must set it positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import (
    CflViolation,
    GridMismatch,
    NegativeInput,
    NonFinite,
    ValidationError,
    VacuumBreakdown,
)
from .grid import Grid1D

__all__ = [
    "FluidParams",
    "FluidState",
    "pressure",
    "sound_speed",
    "viscous_stress",
    "continuity_step",
    "momentum_step",
    "fluid_step",
    "fluid_cfl_limit",
]


@dataclass(frozen=True)
class FluidParams:
    """Viscosities, coupling coefficients, and solver guards.

    rho_star is the congestion threshold field (scalar or per-cell array);
    None selects the plain power law p = rho^gamma. well_balanced switches
    the rho-pressure gradient to gamma/(gamma-1) rho grad(rho^(gamma-1)),
    which is exact on lake-at-rest states but not momentum-conservative.
    """

    mu_s: float
    mu_b: float
    xi: float = 0.0
    vacuum_floor: float = 1e-10
    well_balanced: bool = False
    rho_star: float | np.ndarray | None = None
    force: Callable[[np.ndarray, float], np.ndarray] | None = None

    def __post_init__(self):
        errs = []
        if not (self.mu_s > 0.0 and math.isfinite(self.mu_s)):
            errs.append(f"fluid.mu_s: must be positive and finite, got {self.mu_s}")
        if not (self.mu_b >= 0.0 and math.isfinite(self.mu_b)):
            errs.append(f"fluid.mu_b: must be nonnegative and finite, got {self.mu_b}")
        if not (self.xi >= 0.0 and math.isfinite(self.xi)):
            errs.append(f"fluid.xi: must be nonnegative and finite, got {self.xi}")
        if not (0.0 < self.vacuum_floor < 1e-2):
            errs.append(
                f"fluid.vacuum_floor: must lie in (0, 1e-2), got {self.vacuum_floor}"
            )
        if self.rho_star is not None:
            rs = np.asarray(self.rho_star, dtype=float)
            if np.any(rs <= 0.0) or not np.all(np.isfinite(rs)):
                errs.append("fluid.rho_star: threshold must be positive and finite")
        if errs:
            raise ValidationError(errs)


@dataclass(eq=False)
class FluidState:
    """Density and velocity on the physical grid with the pressure exponent."""

    rho: np.ndarray
    u: np.ndarray
    gamma: float
    grid: Grid1D

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        self.grid.check_field(self.rho, "rho")
        self.grid.check_field(self.u, "u")
        if not (self.gamma > 1.5 and math.isfinite(self.gamma)):
            raise ValidationError([f"fluid.gamma: must exceed 3/2, got {self.gamma}"])
        if np.any(self.rho < 0.0):
            raise NegativeInput("density must be nonnegative")
        if not (np.all(np.isfinite(self.rho)) and np.all(np.isfinite(self.u))):
            raise NonFinite("fluid state has non-finite entries")

    def momentum(self) -> np.ndarray:
        return self.rho * self.u


def pressure(rho, gamma: float, rho_star=None):
    """Isentropic pressure p = (rho/rho_star)^gamma (rho_star defaults to 1)."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0.0):
        raise NegativeInput("density must be nonnegative")
    # inf from an overflowing power is a meaningful saturation value here;
    # the stepper's budget guard turns it into a recorded failure
    with np.errstate(over="ignore"):
        if rho_star is None:
            out = rho**gamma
        else:
            out = (rho / np.asarray(rho_star, dtype=float)) ** gamma
    return out if out.ndim else float(out)


def sound_speed(rho, gamma: float, rho_star=None):
    """c = sqrt(p'(rho)) for the selected pressure law."""
    rho = np.asarray(rho, dtype=float)
    with np.errstate(over="ignore"):
        if rho_star is None:
            out = np.sqrt(gamma * rho ** (gamma - 1.0))
        else:
            rs = np.asarray(rho_star, dtype=float)
            out = np.sqrt(gamma * (rho / rs) ** (gamma - 1.0) / rs)
    return out if out.ndim else float(out)


def viscous_stress(u: np.ndarray, params: FluidParams, grid) -> np.ndarray:
    """Newtonian stress S for a velocity field in d=1 or d=2.

    d=1: u has shape (nx,), grid is the Grid1D; returns the scalar field
    mu_b * du/dx (the deviatoric part is identically zero).
    d=2: u has shape (2, n1, n2), grid is the spacing pair (h1, h2); returns
    S with shape (2, 2, n1, n2) using centered stencils inside and one-sided
    at the edges.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        if not isinstance(grid, Grid1D):
            raise GridMismatch("d=1 viscous_stress needs the Grid1D")
        return params.mu_b * grid.gradient(u)
    if u.ndim == 3 and u.shape[0] == 2:
        h1, h2 = grid
        gu = np.empty((2, 2) + u.shape[1:])
        for c in range(2):
            gu[c, 0] = np.gradient(u[c], h1, axis=0)
            gu[c, 1] = np.gradient(u[c], h2, axis=1)
        dsym = 0.5 * (gu + np.swapaxes(gu, 0, 1))
        div = gu[0, 0] + gu[1, 1]
        eye = np.eye(2)[:, :, None, None]
        return params.mu_s * (dsym - 0.5 * div * eye) + params.mu_b * div * eye
    raise GridMismatch(f"velocity shape {u.shape} not understood (want (nx,) or (2,n1,n2))")


def _upwind_flux(cell: np.ndarray, u_ifc: np.ndarray, grid: Grid1D) -> np.ndarray:
    """Donor-cell interface fluxes of a cell quantity, shape (nx+1,)."""
    nx = grid.nx
    idx = np.arange(nx + 1)
    left = cell[(idx - 1) % nx]
    right = cell[idx % nx]
    flux = u_ifc * np.where(u_ifc >= 0, left, right)
    if not grid.periodic:
        flux[0] = 0.0
        flux[-1] = 0.0
    return flux


def fluid_cfl_limit(state: FluidState, params: FluidParams) -> float:
    """dx / max(|u| + c) advective-acoustic limit."""
    c = sound_speed(state.rho, state.gamma, params.rho_star)
    speed = float(np.max(np.abs(state.u) + c))
    return math.inf if speed == 0.0 else state.grid.dx / speed


def _check_dt(dt: float, state: FluidState, params: FluidParams):
    if dt < 0 or not math.isfinite(dt):
        raise ValidationError([f"dt: must be finite and nonnegative, got {dt}"])
    limit = fluid_cfl_limit(state, params)
    if dt > limit * (1.0 + 1e-12):
        raise CflViolation(
            f"fluid dt {dt:g} exceeds stability limit {limit:g}", dt=dt, limit=limit
        )


def continuity_step(state: FluidState, dt: float, params: FluidParams) -> np.ndarray:
    """Conservative upwind density update; exact mass telescoping."""
    _check_dt(dt, state, params)
    grid = state.grid
    u_ifc = grid.interface_values(state.u)
    flux = _upwind_flux(state.rho, u_ifc, grid)
    return state.rho - dt * grid.flux_divergence(flux)


def momentum_step(state: FluidState, eta: np.ndarray, tau1: np.ndarray, dt: float,
                  params: FluidParams, time: float = 0.0,
                  rho_new: np.ndarray | None = None) -> np.ndarray:
    """Momentum update; returns the new velocity u' = m'/rho'.

    Convection and the tau_1 source are conservative interface differences;
    the grouped pressure gradient grad(p + xi eta^2) uses interface averages
    (or the well-balanced form when selected); viscosity is solved
    semi-implicitly; cells at or below the vacuum floor get u' = 0 unless
    they still carry momentum, which raises VacuumBreakdown.
    """
    _check_dt(dt, state, params)
    grid = state.grid
    grid.check_field(np.asarray(eta), "eta")
    grid.check_field(np.asarray(tau1), "tau1")
    rho, u = state.rho, state.u
    if dt == 0.0:
        return u.copy()
    if rho_new is None:
        rho_new = continuity_step(state, dt, params)
    m = rho * u
    u_ifc = grid.interface_values(u)

    conv = grid.flux_divergence(_upwind_flux(m, u_ifc, grid))

    if params.well_balanced:
        g = state.gamma
        rr = rho if params.rho_star is None else rho / np.asarray(params.rho_star)
        grad_p = g / (g - 1.0) * rho * grid.gradient(rr ** (g - 1.0))
        if params.rho_star is not None:
            grad_p = grad_p / np.asarray(params.rho_star)
        grad_p = grad_p + grid.flux_divergence(
            grid.interface_values(params.xi * eta * eta))
    else:
        p_tot = pressure(rho, state.gamma, params.rho_star) + params.xi * eta * eta
        grad_p = grid.flux_divergence(grid.interface_values(p_tot))

    div_tau = grid.flux_divergence(grid.interface_values(np.asarray(tau1, dtype=float)))

    m_star = m - dt * (conv + grad_p) + dt * div_tau
    if params.force is not None:
        m_star = m_star + dt * rho_new * params.force(grid.centers, time)

    if params.mu_b > 0.0:
        u_new = _implicit_viscosity(m_star, rho_new, dt, params.mu_b, grid)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            u_new = np.where(rho_new > params.vacuum_floor, m_star / rho_new, 0.0)

    low = rho_new <= params.vacuum_floor
    if np.any(low):
        if float(np.max(np.abs(m_star[low]))) > 1e-8:
            raise VacuumBreakdown(
                "density at the vacuum floor still carries momentum"
            )
        u_new = np.where(low, 0.0, u_new)
    return u_new


def _implicit_viscosity(m_star: np.ndarray, rho_new: np.ndarray, dt: float,
                        mu: float, grid: Grid1D) -> np.ndarray:
    nx = grid.nx
    c = dt * mu / grid.dx**2
    safe_rho = np.maximum(rho_new, 1e-300)
    if grid.periodic:
        main = safe_rho + 2.0 * c
        off = np.full(nx - 1, -c)
        mat = scipy.sparse.diags([off, main, off], [-1, 0, 1], format="lil")
        mat[0, -1] -= c
        mat[-1, 0] -= c
        return scipy.sparse.linalg.splu(mat.tocsc()).solve(m_star)
    main = safe_rho + 2.0 * c
    main[0] += c     # no-slip wall: flux mu*(u_0-0)/(dx/2)
    main[-1] += c
    ab = np.zeros((3, nx))
    ab[0, 1:] = -c
    ab[1] = main
    ab[2, :-1] = -c
    return scipy.linalg.solve_banded((1, 1), ab, m_star)


def fluid_step(state: FluidState, eta: np.ndarray, tau1: np.ndarray, dt: float,
               params: FluidParams, time: float = 0.0) -> FluidState:
    """Continuity then momentum, sharing the same fluxes and new density."""
    rho_new = continuity_step(state, dt, params)
    u_new = momentum_step(state, eta, tau1, dt, params, time=time, rho_new=rho_new)
    return FluidState(rho=rho_new, u=u_new, gamma=state.gamma, grid=state.grid)
