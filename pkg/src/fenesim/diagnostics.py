"""Energy bookkeeping: term-by-term breakdowns and the step inequality.

The tracked functional is

    E = int rho |u|^2 / 2 + xi eta^2 + k (c_eta - (K+1)) F(eta) dx
        + k int int M F(psi_hat) dq dx,        F(s) = s (log s - 1) + 1,

and the pressure energy int p/(gamma-1) dx is kept as a separate field
(p_gamma): it is the term that grows with gamma and vanishes only in the
stiff limit. The decay statement checked per step and at the final time is
for E + p_gamma, the full Lyapunov functional of the semi-discrete system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NegativeInput, NonFinite
from .fluid import FluidParams, FluidState, pressure
from .kinetic import ConfigDistribution, FpOperators, KineticParams
from .stress import StressParams

__all__ = [
    "entropy",
    "EnergyBreakdown",
    "EnergyCheck",
    "energy_breakdown",
    "check_energy_inequality",
    "ensure_finite",
    "mass_totals",
]


def entropy(s):
    """Convex entropy density F(s) = s (log s - 1) + 1; F(0) = 1, F(1) = 0."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0):
        raise NegativeInput("entropy argument must be nonnegative")
    safe = np.where(s > 0.0, s, 1.0)
    out = np.where(s > 0.0, s * (np.log(safe) - 1.0) + 1.0, 1.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class EnergyBreakdown:
    """Every term of the energy balance at one instant.

    total sums the four energy terms; p_gamma = int p/(gamma-1) dx is kept
    out of total and reported alongside. c_eta is recorded verbatim; the
    eta entropy terms carry the coefficient k (c_eta - (K+1)).
    """

    kinetic: float
    eta_sq: float
    eta_entropy: float
    psi_entropy: float
    p_gamma: float
    diss_shear: float
    diss_bulk: float
    diss_eta_grad: float
    diss_eta_fisher: float
    diss_psi_x: float
    diss_psi_q: float
    work: float
    total: float
    c_eta: float

    def dissipation_total(self) -> float:
        return (self.diss_shear + self.diss_bulk + self.diss_eta_grad
                + self.diss_eta_fisher + self.diss_psi_x + self.diss_psi_q)

    def full_energy(self) -> float:
        """Energy including the pressure term; the decaying functional."""
        return self.total + self.p_gamma


@dataclass(frozen=True)
class EnergyCheck:
    """Verdict of the discrete energy inequality over a recorded history."""

    residuals: np.ndarray
    bounds: np.ndarray
    worst_step: int
    worst_margin: float
    per_step_ok: bool
    terminal_ok: bool

    @property
    def ok(self) -> bool:
        return self.per_step_ok and self.terminal_ok


def _entropy_integral_q(dist: ConfigDistribution) -> np.ndarray:
    w = dist.quad.mweights_nd
    qaxes = tuple(range(1, dist.values.ndim))
    return np.tensordot(entropy(dist.values), w, axes=(qaxes, tuple(range(w.ndim))))


def _sqrt_q_gradients(dist: ConfigDistribution, ops: FpOperators):
    """Node-centered q-gradients of sqrt(psi_hat), one array per spring axis."""
    root = np.sqrt(np.maximum(dist.values, 0.0))
    grads = []
    for i in range(ops.K):
        g = ops._axis_gradient(np.moveaxis(root, 1 + i, -1), i)
        grads.append(np.moveaxis(g, -1, 1 + i))
    return root, grads


def energy_breakdown(fluid: FluidState, eta: np.ndarray, dist: ConfigDistribution,
                     sparams: StressParams, kparams: KineticParams,
                     fparams: FluidParams, c_eta: float,
                     ops: FpOperators | None = None,
                     time: float = 0.0) -> EnergyBreakdown:
    """Evaluate every energy and dissipation integral on the current fields.

    In one space dimension the deviatoric shear term vanishes identically,
    so diss_shear is exactly zero and mu_s never enters the balance.
    """
    grid = fluid.grid
    model = dist.quad.model
    eta = np.asarray(eta, dtype=float)
    if ops is None:
        ops = FpOperators(model, dist.quad, kparams)
    ensure_finite(-1, rho=fluid.rho, u=fluid.u, eta=eta, psi_hat=dist.values)

    k = sparams.k
    eps = kparams.epsilon
    coeff = k * (c_eta - (model.K + 1))

    kinetic = grid.integrate(0.5 * fluid.rho * fluid.u**2)
    eta_sq = sparams.xi * grid.integrate(eta**2)
    eta_ent = coeff * grid.integrate(entropy(eta))
    psi_ent = k * grid.integrate(_entropy_integral_q(dist))
    p_gamma = grid.integrate(
        pressure(fluid.rho, fluid.gamma, fparams.rho_star)) / (fluid.gamma - 1.0)

    dudx = grid.gradient(fluid.u)
    diss_shear = 0.0
    diss_bulk = fparams.mu_b * grid.integrate(dudx**2)
    diss_eta_grad = 2.0 * eps * sparams.xi * grid.integrate(grid.gradient(eta) ** 2)
    diss_eta_fisher = 4.0 * eps * coeff * grid.integrate(
        grid.gradient(np.sqrt(np.maximum(eta, 0.0))) ** 2)

    root, grads = _sqrt_q_gradients(dist, ops)
    w = dist.quad.mweights_nd
    qaxes = tuple(range(1, root.ndim))
    waxes = tuple(range(w.ndim))
    gx = grid.gradient(root)
    diss_psi_x = 4.0 * k * eps * grid.integrate(
        np.tensordot(gx * gx, w, axes=(qaxes, waxes)))

    A = model.A
    acc = np.zeros(grid.nx)
    for i in range(model.K):
        for j in range(model.K):
            if A[i, j] == 0.0:
                continue
            acc += A[i, j] * np.tensordot(grads[i] * grads[j], w, axes=(qaxes, waxes))
    diss_psi_q = (k / kparams.lam) * grid.integrate(acc)

    if fparams.force is None:
        work = 0.0
    else:
        f = np.asarray(fparams.force(grid.centers, time), dtype=float)
        work = grid.integrate(fluid.rho * f * fluid.u)

    total = kinetic + eta_sq + eta_ent + psi_ent
    return EnergyBreakdown(
        kinetic=kinetic, eta_sq=eta_sq, eta_entropy=eta_ent, psi_entropy=psi_ent,
        p_gamma=p_gamma, diss_shear=diss_shear, diss_bulk=diss_bulk,
        diss_eta_grad=diss_eta_grad, diss_eta_fisher=diss_eta_fisher,
        diss_psi_x=diss_psi_x, diss_psi_q=diss_psi_q, work=work, total=total,
        c_eta=c_eta,
    )


def check_energy_inequality(history, dt, constant: float) -> EnergyCheck:
    """Validate E_{n+1} - E_n + dt (D_{n+1} - W_{n+1}) <= C dt^2 per step.

    history holds one EnergyBreakdown per recorded instant, initial state
    included; dt is a scalar or the n_steps step sizes. E here is the full
    energy (pressure term included). The terminal check asks
    E(T) <= E(0) + sum dt W.
    """
    full = np.array([h.full_energy() for h in history])
    diss = np.array([h.dissipation_total() for h in history])
    work = np.array([h.work for h in history])
    nstep = full.size - 1
    dts = np.broadcast_to(np.asarray(dt, dtype=float), (nstep,)).astype(float)
    residuals = np.diff(full) + dts * (diss[1:] - work[1:])
    bounds = constant * dts**2
    if nstep:
        margins = residuals - bounds
        worst_step = int(np.argmax(margins))
        worst_margin = float(margins[worst_step])
    else:
        worst_step = -1
        worst_margin = -math.inf
    per_step_ok = bool(worst_margin <= 0.0)
    injected = float(np.sum(dts * work[1:]))
    slack = 1e-12 * max(1.0, abs(float(full[0])))
    terminal_ok = bool(full[-1] <= full[0] + injected + slack)
    return EnergyCheck(residuals=residuals, bounds=bounds, worst_step=worst_step,
                       worst_margin=worst_margin, per_step_ok=per_step_ok,
                       terminal_ok=terminal_ok)


def ensure_finite(step: int, **fields) -> None:
    """Raise NonFinite naming the first offending field at this step."""
    for name, arr in fields.items():
        if not np.all(np.isfinite(np.asarray(arr, dtype=float))):
            raise NonFinite(f"{name} has non-finite entries", step=step)


def mass_totals(fluid: FluidState, eta: np.ndarray,
                dist: ConfigDistribution) -> tuple[float, float, float]:
    """(int rho, int int M psi_hat, int eta) for the conservation columns."""
    grid = fluid.grid
    return (
        grid.integrate(fluid.rho),
        dist.mass(),
        grid.integrate(np.asarray(eta, dtype=float)),
    )
