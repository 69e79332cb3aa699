"""Maxwellian-normalized FENE Fokker-Planck solver.

The unknown is psi_hat = psi/M on the tensor grid (physical cells) x (per-spring
Gauss nodes). Terms, written for the psi_hat tendency:

    -div_x(psi_hat u)                                    upwind, conservative
    -(1/M) sum_i grad_{q_i} . (sigma(u) q_i M beta_L(psi_hat))   upwind in q
    +eps Lap_x psi_hat                                   explicit or implicit
    +(1/(4 lambda)) (1/M) sum_ij A_ij grad_{q_i} . (M grad_{q_j} psi_hat)
                                                         backward Euler

Every q-operator is a flux difference scaled by the quadrature weights, so
total mass telescopes to the (vanishing) boundary fluxes and the constant
state is a bitwise fixed point: all fluxes are built from differences of
node values, which are exactly zero for constants.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import CflViolation, GridMismatch, NonConvergence, ValidationError
from .grid import Grid1D
from .potentials import ProductQuadrature, SpringModel

__all__ = [
    "KineticParams",
    "ConfigDistribution",
    "FpOperators",
    "uniform_distribution",
    "cutoff",
    "fp_rhs",
    "fp_step",
    "recover_psi",
    "transport_tendency",
    "drift_tendency",
    "xdiff_tendency",
    "qdiff_tendency",
    "kinetic_cfl_limit",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class KineticParams:
    """Center-of-mass diffusion eps, relaxation lambda, drift cutoff level.

    cutoff_level=inf disables the cutoff (beta is the identity). Run configs
    demand cutoff_level > 1; the dataclass itself accepts any positive value
    so the cutoff branch can be exercised directly.
    """

    epsilon: float
    lam: float
    cutoff_level: float = math.inf
    x_diffusion: str = "explicit"

    def __post_init__(self):
        errs = []
        if not (self.epsilon > 0.0 and math.isfinite(self.epsilon)):
            errs.append(f"kinetic.epsilon: must be positive and finite, got {self.epsilon}")
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            errs.append(f"kinetic.lambda: must be positive and finite, got {self.lam}")
        if not self.cutoff_level > 0.0:
            errs.append(f"kinetic.cutoff: must be positive, got {self.cutoff_level}")
        if self.x_diffusion not in ("explicit", "implicit"):
            errs.append(
                f"kinetic.x_diffusion: expected 'explicit' or 'implicit', got {self.x_diffusion!r}"
            )
        if errs:
            raise ValidationError(errs)


def cutoff(s, level: float):
    """beta_L(s) = min(s, L); the identity when level is inf."""
    if math.isinf(level):
        return s
    return np.minimum(s, level)


@dataclass(eq=False)
class ConfigDistribution:
    """psi_hat sampled on (physical cells) x (tensor of per-spring nodes).

    values has shape (nx, n_1, ..., n_K). last_mass_correction records how
    much mass the positivity clip of the step that produced this state had
    to restore (0.0 when the clip was inactive).
    """

    values: np.ndarray
    grid: Grid1D
    quad: ProductQuadrature
    last_mass_correction: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        want = (self.grid.nx,) + self.quad.shape
        if self.values.shape != want:
            raise GridMismatch(f"psi_hat shape {self.values.shape} != {want}")

    @property
    def model(self) -> SpringModel:
        return self.quad.model

    def density(self) -> np.ndarray:
        """int M psi_hat dq per physical cell."""
        w = self.quad.mweights_nd
        qaxes = tuple(range(1, self.values.ndim))
        return np.tensordot(self.values, w, axes=(qaxes, tuple(range(w.ndim))))

    def mass(self) -> float:
        return float(np.sum(self.density()) * self.grid.dx)

    def copy(self) -> "ConfigDistribution":
        return replace(self, values=self.values.copy())


def uniform_distribution(grid: Grid1D, quad: ProductQuadrature,
                         value: float = 1.0) -> ConfigDistribution:
    return ConfigDistribution(np.full((grid.nx,) + quad.shape, value), grid, quad)


def recover_psi(dist: ConfigDistribution) -> np.ndarray:
    """Physical distribution psi = M psi_hat on the node set."""
    return dist.values * dist.quad.mvals_nd[None, ...]


def _col(a: np.ndarray, ndim: int) -> np.ndarray:
    """Reshape a 1-D x-array for broadcasting over trailing q axes."""
    return a.reshape(a.shape + (1,) * (ndim - 1))


class FpOperators:
    """Precomputed geometry and the implicit q-diffusion solver for one model.

    Construction is cheap but not free; the coupled driver builds one
    instance per run and threads it through every step.
    """

    def __init__(self, model: SpringModel, quad: ProductQuadrature, params: KineticParams):
        if model.d != 1:
            raise ValidationError(
                ["spring.d: the kinetic solver supports configuration dimension 1"]
            )
        self.model = model
        self.quad = quad
        self.params = params
        self.K = model.K
        self.shape = quad.shape
        self.nq_total = quad.nq_total
        self._solve_cache: tuple[float, object] | None = None
        self._axis_geometry()
        self._build_matrix()

    def _axis_geometry(self):
        self.drift_qm = []       # q*M at interfaces, zero at the ball ends
        self.grad_a = []         # nonuniform centered-gradient weights, forward part
        self.grad_b = []         # backward part
        self.drift_cfl = math.inf
        for ax in self.quad.axes:
            qm = ax.interfaces * ax.m_ifc
            qm[0] = qm[-1] = 0.0
            self.drift_qm.append(qm)
            h = ax.gaps
            n = ax.n
            a = np.zeros(n)
            b = np.zeros(n)
            hm, hp = h[:-1], h[1:]
            a[1:-1] = hm / ((hm + hp) * hp)
            b[1:-1] = hp / ((hm + hp) * hm)
            a[0] = 1.0 / h[0]
            b[-1] = 1.0 / h[-1]
            self.grad_a.append(a)
            self.grad_b.append(b)
            out = np.abs(qm[1:]) + np.abs(qm[:-1])
            g = np.where(out > 0, ax.mweights / np.where(out > 0, out, 1.0), math.inf)
            self.drift_cfl = min(self.drift_cfl, float(g.min()))

    def _axis_gradient(self, vals: np.ndarray, i: int) -> np.ndarray:
        """d/dq_i by nonuniform centered differences; acts on the last axis."""
        a, b = self.grad_a[i], self.grad_b[i]
        fwd = vals[..., 1:] - vals[..., :-1]
        out = np.zeros_like(vals)
        out[..., :-1] += a[:-1] * fwd
        out[..., 1:] += b[1:] * fwd
        return out

    def qdiff_apply(self, values: np.ndarray) -> np.ndarray:
        """(1/(4 lambda M)) sum_ij A_ij grad_{q_i}.(M grad_{q_j} psi_hat).

        Pure difference/flux arithmetic: constants map to exact zeros.
        """
        A = self.model.A
        out = np.zeros_like(values)
        for i, ax in enumerate(self.quad.axes):
            axis = 1 + i
            v = np.moveaxis(values, axis, -1)
            acc = np.zeros_like(v)
            # diagonal: two-point flux M_ifc (psi_{m+1}-psi_m)/h
            flux = ax.m_ifc[1:-1] * (v[..., 1:] - v[..., :-1]) / ax.gaps
            term = np.zeros_like(v)
            term[..., :-1] += flux
            term[..., 1:] -= flux
            acc += A[i, i] * (term / ax.mweights)
            # mixed: flux M_ifc * avg of grad_{q_j} psi at the two adjacent nodes
            for j in range(self.K):
                if j == i or A[i, j] == 0.0:
                    continue
                g = np.moveaxis(
                    self._axis_gradient(np.moveaxis(values, 1 + j, -1), j), -1, 1 + j)
                g = np.moveaxis(g, axis, -1)
                flux = ax.m_ifc[1:-1] * 0.5 * (g[..., 1:] + g[..., :-1])
                term = np.zeros_like(v)
                term[..., :-1] += flux
                term[..., 1:] -= flux
                acc += A[i, j] * (term / ax.mweights)
            out += np.moveaxis(acc, -1, axis)
        return out / (4.0 * self.params.lam)

    def _matrix_for_axis(self, i: int) -> scipy.sparse.csr_matrix:
        ax = self.quad.axes[i]
        n = ax.n
        c = ax.m_ifc[1:-1] / ax.gaps
        w = ax.mweights
        main = np.zeros(n)
        main[:-1] -= c / w[:-1]
        main[1:] -= c / w[1:]
        upper = c / w[:-1]
        lower = c / w[1:]
        return scipy.sparse.diags([lower, main, upper], [-1, 0, 1], format="csr")

    def _matrix_gradient(self, i: int) -> scipy.sparse.csr_matrix:
        ax = self.quad.axes[i]
        n = ax.n
        a, b = self.grad_a[i], self.grad_b[i]
        main = np.zeros(n)
        main[:-1] -= a[:-1]
        main[1:] += b[1:]
        upper = a[:-1]
        lower = -b[1:]
        return scipy.sparse.diags([lower, main, upper], [-1, 0, 1], format="csr")

    def _matrix_mixed_div(self, i: int) -> scipy.sparse.csr_matrix:
        ax = self.quad.axes[i]
        n = ax.n
        c = 0.5 * ax.m_ifc[1:-1]
        w = ax.mweights
        main = np.zeros(n)
        main[:-1] += c / w[:-1]
        main[1:] -= c / w[1:]
        upper = c / w[:-1]
        lower = -c / w[1:]
        return scipy.sparse.diags([lower, main, upper], [-1, 0, 1], format="csr")

    def _build_matrix(self):
        A = self.model.A
        eyes = [scipy.sparse.identity(n, format="csr") for n in self.shape]

        def kron_chain(mats):
            out = mats[0]
            for m in mats[1:]:
                out = scipy.sparse.kron(out, m, format="csr")
            return out

        total = scipy.sparse.csr_matrix((self.nq_total, self.nq_total))
        for i in range(self.K):
            mats = list(eyes)
            mats[i] = self._matrix_for_axis(i)
            total = total + A[i, i] * kron_chain(mats)
            for j in range(self.K):
                if j == i or A[i, j] == 0.0:
                    continue
                mats = list(eyes)
                mats[i] = self._matrix_mixed_div(i)
                mats[j] = self._matrix_gradient(j)
                total = total + A[i, j] * kron_chain(mats)
        self.qdiff_matrix = (total / (4.0 * self.params.lam)).tocsr()
        self._dense = self.qdiff_matrix.toarray() if self.nq_total <= 128 else None

    def qdiff_solve(self, rhs_flat: np.ndarray, dt: float) -> np.ndarray:
        """Solve (I - dt Lq) x = rhs for all physical cells at once; rhs (nx, nQ)."""
        if self._solve_cache is not None and self._solve_cache[0] == dt:
            kind, fac = self._solve_cache[1]
        else:
            if self._dense is not None:
                mat = np.eye(self.nq_total) - dt * self._dense
                fac = scipy.linalg.lu_factor(mat)
                kind = "dense"
            else:
                mat = (scipy.sparse.identity(self.nq_total, format="csc")
                       - dt * self.qdiff_matrix.tocsc())
                fac = scipy.sparse.linalg.splu(mat)
                kind = "sparse"
            self._solve_cache = (dt, (kind, fac))
        if kind == "dense":
            return scipy.linalg.lu_solve(fac, rhs_flat.T).T
        return fac.solve(rhs_flat.T).T


def transport_tendency(dist: ConfigDistribution, u: np.ndarray) -> np.ndarray:
    """-div_x(psi_hat u) with donor-cell upwinding at interface velocities."""
    grid = dist.grid
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.nx,):
        raise GridMismatch(f"u shape {u.shape} != ({grid.nx},)")
    psi = dist.values
    nx = grid.nx
    u_ifc = grid.interface_values(u)                       # (nx+1,)
    idx = np.arange(nx + 1)
    left = psi[(idx - 1) % nx]
    right = psi[idx % nx]
    uif = _col(u_ifc, psi.ndim)
    flux = uif * np.where(uif >= 0, left, right)
    if not grid.periodic:
        flux[0] = 0.0
        flux[-1] = 0.0
    return -(flux[1:] - flux[:-1]) / grid.dx


def drift_tendency(dist: ConfigDistribution, u: np.ndarray, params: KineticParams,
                   ops: FpOperators) -> np.ndarray:
    """-(1/M) sum_i grad_{q_i} . (sigma(u) q_i M beta_L(psi_hat))."""
    grid = dist.grid
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.nx,):
        raise GridMismatch(f"u shape {u.shape} != ({grid.nx},)")
    sigma = grid.gradient(u)
    beta = cutoff(dist.values, params.cutoff_level)
    out = np.zeros_like(dist.values)
    sig = _col(sigma, beta.ndim)
    sig_sign = sig >= 0
    for i, ax in enumerate(ops.quad.axes):
        axis = 1 + i
        qm = ops.drift_qm[i][1:-1]                         # interior interfaces
        b = np.moveaxis(beta, axis, -1)
        s = np.moveaxis(np.broadcast_to(sig_sign, beta.shape), axis, -1)[..., :-1]
        take_left = s == (qm >= 0)                         # sign(sigma*q) >= 0
        up = np.where(take_left, b[..., :-1], b[..., 1:])
        sigv = np.moveaxis(np.broadcast_to(sig, beta.shape), axis, -1)[..., :-1]
        flux = sigv * qm * up
        # flux difference with zero end fluxes, then the -(1/W) scaling
        term = np.zeros_like(b)
        term[..., :-1] += flux
        term[..., 1:] -= flux
        out -= np.moveaxis(term / ax.mweights, -1, axis)
    return out


def xdiff_tendency(dist: ConfigDistribution, epsilon: float) -> np.ndarray:
    """eps Lap_x psi_hat (M is x-independent, so the Maxwellian cancels)."""
    return epsilon * dist.grid.laplacian(dist.values)


def qdiff_tendency(dist: ConfigDistribution, ops: FpOperators) -> np.ndarray:
    return ops.qdiff_apply(dist.values)


def fp_rhs(dist: ConfigDistribution, u: np.ndarray, params: KineticParams,
           model: SpringModel, ops: FpOperators | None = None) -> np.ndarray:
    """Full tendency of psi_hat; the sum of the four term functions."""
    if ops is None:
        ops = FpOperators(model, dist.quad, params)
    return (
        transport_tendency(dist, u)
        + drift_tendency(dist, u, params, ops)
        + xdiff_tendency(dist, params.epsilon)
        + qdiff_tendency(dist, ops)
    )


def kinetic_cfl_limit(dist: ConfigDistribution, u: np.ndarray, params: KineticParams,
                      ops: FpOperators) -> float:
    """Largest stable dt for the explicit terms (coefficient-1 limit)."""
    grid = dist.grid
    u_ifc = grid.interface_values(np.asarray(u, dtype=float))
    umax = float(np.abs(u_ifc).max())
    limit = math.inf
    if umax > 0:
        limit = min(limit, grid.dx / umax)
    if params.x_diffusion == "explicit":
        limit = min(limit, grid.dx**2 / (2.0 * params.epsilon))
    smax = float(np.abs(grid.gradient(np.asarray(u, dtype=float))).max())
    if smax > 0:
        limit = min(limit, ops.drift_cfl / smax)
    return limit


def fp_step(dist: ConfigDistribution, u: np.ndarray, dt: float, params: KineticParams,
            model: SpringModel, ops: FpOperators | None = None) -> ConfigDistribution:
    """One Lie step: explicit transport+drift+x-diffusion, then implicit q-diffusion.

    Raises CflViolation when dt exceeds the explicit stability limit. The
    implicit stage solves in increment form so the constant state passes
    through bitwise; a relative mass defect above 1e-8 raises NonConvergence
    and rounding-level defects are rescaled away. Negative values left by
    roundoff are clipped with the restored mass logged.
    """
    if ops is None:
        ops = FpOperators(model, dist.quad, params)
    if dt < 0 or not math.isfinite(dt):
        raise ValidationError([f"dt: must be finite and nonnegative, got {dt}"])
    limit = kinetic_cfl_limit(dist, u, params, ops)
    if dt > limit * (1.0 + 1e-12):
        raise CflViolation(
            f"kinetic dt {dt:g} exceeds stability limit {limit:g}", dt=dt, limit=limit
        )

    tend = transport_tendency(dist, u) + drift_tendency(dist, u, params, ops)
    if params.x_diffusion == "explicit":
        tend = tend + xdiff_tendency(dist, params.epsilon)
        star = dist.values + dt * tend
    else:
        star = dist.values + dt * tend
        star = _implicit_xdiff(star, dist.grid, params.epsilon, dt)

    w = dist.quad.mweights_nd
    qaxes = tuple(range(1, star.ndim))
    waxes = tuple(range(w.ndim))

    def total_mass(v):
        return float(np.sum(np.tensordot(v, w, axes=(qaxes, waxes))))

    rhs = dt * ops.qdiff_apply(star)
    if np.any(rhs):
        rhs_flat = rhs.reshape(dist.grid.nx, -1)
        delta = ops.qdiff_solve(rhs_flat, dt).reshape(star.shape)
        resid = delta - dt * ops.qdiff_apply(delta) - rhs
        scale = max(float(np.abs(star).max()), float(np.abs(delta).max()), 1e-300)
        if float(np.abs(resid).max()) > 1e-10 * scale:
            raise NonConvergence("implicit q-diffusion residual above 1e-10")
        new = star + delta
        mass_target = total_mass(star)
        mass_cur = total_mass(new)
        defect = mass_cur - mass_target
        if abs(defect) > 1e-8 * max(abs(mass_target), 1.0):
            raise NonConvergence(
                f"implicit q-diffusion mass defect {defect:g} vs target {mass_target:g}"
            )
        if defect != 0.0 and mass_cur != 0.0:
            new = new * (mass_target / mass_cur)
            mass_cur = mass_target
    else:
        new = star
        mass_cur = total_mass(star)

    correction = 0.0
    if np.any(new < 0.0):
        clipped = np.clip(new, 0.0, None)
        mass_clip = total_mass(clipped)
        correction = (mass_clip - mass_cur) * dist.grid.dx
        if mass_clip > 0.0 and mass_cur > 0.0:
            clipped = clipped * (mass_cur / mass_clip)
        new = clipped
        log.warning("fp_step clipped negative psi_hat nodes; mass correction %.3e", correction)

    return ConfigDistribution(new, dist.grid, dist.quad, last_mass_correction=correction)


def _implicit_xdiff(star: np.ndarray, grid: Grid1D, epsilon: float, dt: float) -> np.ndarray:
    nx = grid.nx
    c = epsilon * dt / grid.dx**2
    off = np.full(nx - 1, -c)
    if grid.periodic:
        main = np.full(nx, 1.0 + 2.0 * c)
        mat = scipy.sparse.diags([off, main, off], [-1, 0, 1], format="lil")
        mat[0, -1] = -c
        mat[-1, 0] = -c
        lu = scipy.sparse.linalg.splu(mat.tocsc())
        return lu.solve(star.reshape(nx, -1)).reshape(star.shape)
    main = np.full(nx, 1.0 + 2.0 * c)
    main[0] -= c
    main[-1] -= c    # zero-flux walls
    ab = np.zeros((3, nx))
    ab[0, 1:] = off
    ab[1] = main
    ab[2, :-1] = off
    sol = scipy.linalg.solve_banded((1, 1), ab, star.reshape(nx, -1))
    return sol.reshape(star.shape)
