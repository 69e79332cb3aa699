"""FENE spring potentials, Maxwellian equilibria, and Maxwellian-weighted quadrature.

A chain of K beads carries springs with finite extensibility parameters b_i.
Each spring lives in a configuration ball of radius sqrt(b_i); the potential
U(s) = -(b_i/2) log(1 - 2s/b_i) (s = |q|^2/2) diverges at the boundary and the
associated partial Maxwellian M_i vanishes there like dist^(b_i/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .errors import DomainOverflow, InvalidOrder, RejectedMatrix, Singular, ValidationError

__all__ = [
    "fene_potential",
    "u_prime",
    "spring_force",
    "partial_maxwellian",
    "total_maxwellian",
    "maxwellian_normalization",
    "rouse_matrix",
    "SpringModel",
    "spring_model",
    "AxisQuadrature",
    "DiskQuadrature",
    "ProductQuadrature",
    "build_quadrature",
    "PotentialCertificate",
    "certify_potential",
]


def fene_potential(s, b: float):
    """U(s) = -(b/2) log(1 - 2s/b) for elongation s = |q|^2/2 in [0, b/2).

    Raises DomainOverflow at or beyond the extensibility bound s >= b/2.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s >= b / 2.0):
        raise DomainOverflow(f"elongation s >= b/2 = {b / 2.0}")
    out = -(b / 2.0) * np.log1p(-2.0 * s / b)
    return out if out.ndim else float(out)


def u_prime(s, b: float):
    """U'(s) = 1/(1 - 2s/b); same domain as fene_potential."""
    s = np.asarray(s, dtype=float)
    if np.any(s >= b / 2.0):
        raise DomainOverflow(f"elongation s >= b/2 = {b / 2.0}")
    out = 1.0 / (1.0 - 2.0 * s / b)
    return out if out.ndim else float(out)


def spring_force(q, b: float, axis: int | None = None):
    """FENE force F(q) = (1 - |q|^2/b)^(-1) q.

    With axis=None q is treated elementwise as 1-D configurations; pass
    axis=-1 (or another axis) to treat that axis as the vector components.
    Raises Singular at or beyond the ball boundary |q|^2 >= b.
    """
    q = np.asarray(q, dtype=float)
    if axis is None:
        s2 = q * q
    else:
        s2 = np.sum(q * q, axis=axis, keepdims=True)
    if np.any(s2 >= b):
        raise Singular(f"|q|^2 >= b = {b}")
    out = q / (1.0 - s2 / b)
    return out if out.ndim else float(out)


@lru_cache(maxsize=None)
def maxwellian_normalization(b: float, d: int = 1) -> float:
    """Normalization Z = int_D (1 - |q|^2/b)^(b/2) dq over the radius-sqrt(b) ball.

    Evaluated with the shifted-exponent Jacobi rule, which integrates the
    extra degree-d polynomial factor exactly, so the value is exact up to
    rounding for every b > 0.
    """
    n = 64
    if d == 1:
        t, v = roots_jacobi(n, b / 2.0 - 1.0, b / 2.0 - 1.0)
        q = math.sqrt(b) * t
        raw = math.sqrt(b) * v
        return float(np.sum(raw * (1.0 - q * q / b)))
    if d == 2:
        s, v = roots_jacobi(n, b / 2.0 - 1.0, 0.0)
        r2 = b * (1.0 + s) / 2.0
        raw = (b / 4.0) * v / 2.0 ** (b / 2.0 - 1.0)
        return float(2.0 * math.pi * np.sum(raw * (1.0 - r2 / b)))
    raise ValidationError([f"spring.d: configuration dimension must be 1 or 2, got {d}"])


def partial_maxwellian(q, b: float, d: int = 1):
    """Normalized equilibrium M_i(q) = Z^-1 (1 - |q|^2/b)^(b/2).

    Returns 0 at and outside the ball boundary (continuous extension).
    For d=2 the last axis of q holds the two components.
    """
    q = np.asarray(q, dtype=float)
    if d == 1:
        s2 = q * q
    else:
        s2 = np.sum(q * q, axis=-1)
    z = maxwellian_normalization(b, d)
    body = np.clip(1.0 - s2 / b, 0.0, None)
    out = body ** (b / 2.0) / z
    return out if out.ndim else float(out)


def rouse_matrix(K: int, override=None) -> np.ndarray:
    """Symmetric positive definite coupling matrix between springs.

    Default is the second-difference chain matrix tridiag(-1, 2, -1).
    A supplied override must be symmetric positive definite, else
    RejectedMatrix.
    """
    if K < 1:
        raise ValidationError([f"spring.K: need K >= 1, got {K}"])
    if override is None:
        a = 2.0 * np.eye(K)
        idx = np.arange(K - 1)
        a[idx, idx + 1] = -1.0
        a[idx + 1, idx] = -1.0
        return a
    a = np.asarray(override, dtype=float)
    if a.shape != (K, K):
        raise RejectedMatrix(f"coupling matrix shape {a.shape} != ({K}, {K})")
    if not np.all(np.isfinite(a)):
        raise RejectedMatrix("coupling matrix has non-finite entries")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12):
        raise RejectedMatrix("coupling matrix is not symmetric")
    eigs = np.linalg.eigvalsh(a)
    if eigs.min() <= 0.0:
        raise RejectedMatrix(f"coupling matrix is not positive definite (min eig {eigs.min():g})")
    return a


@dataclass(frozen=True, eq=False)
class SpringModel:
    """K FENE springs in d-dimensional configuration balls, coupled by A.

    b_i > 2 is a certification concern, not a construction one, so any
    positive extensibility is accepted here.
    """

    K: int
    d: int
    b: tuple[float, ...]
    A: np.ndarray

    def __post_init__(self):
        errs = []
        if self.K < 1:
            errs.append(f"spring.K: need K >= 1, got {self.K}")
        if self.d not in (1, 2):
            errs.append(f"spring.d: configuration dimension must be 1 or 2, got {self.d}")
        if len(self.b) != self.K:
            errs.append(f"spring.b: expected {self.K} values, got {len(self.b)}")
        if any((not math.isfinite(bi)) or bi <= 0.0 for bi in self.b):
            errs.append(f"spring.b: extensibility must be finite and positive, got {self.b}")
        if errs:
            raise ValidationError(errs)
        rouse_matrix(self.K, self.A)  # SPD check; raises RejectedMatrix

    @property
    def theta(self) -> tuple[float, ...]:
        return tuple(bi / 2.0 for bi in self.b)


def spring_model(K: int = 1, b=4.0, d: int = 1, rouse=None) -> SpringModel:
    """Convenience constructor; a scalar b is replicated across the K springs."""
    if np.isscalar(b):
        bs = (float(b),) * K
    else:
        bs = tuple(float(x) for x in b)
    a = rouse_matrix(K, rouse)
    return SpringModel(K=K, d=d, b=bs, A=a)


@dataclass(frozen=True, eq=False)
class AxisQuadrature:
    """Maxwellian-weighted Gauss rule for one spring with d=1.

    Nodes are the Gauss-Jacobi points for exponent b/2 - 1; on those shared
    nodes two weight vectors coexist:

      mweights: sum mweights*f(nodes) = int f M dq   (exact for deg <= 2n-3)
      fweights: sum fweights*f(nodes) = int f M U' q^2 dq (same exactness)

    Splitting one power of (1 - q^2/b) off the Maxwellian keeps both rules
    polynomial-exact; in particular normalization and the Kramers equilibrium
    identity hold to rounding. Interface data (midpoints plus the ball ends,
    where M vanishes) supports the finite-volume operators in q.
    """

    b: float
    n: int
    nodes: np.ndarray
    mweights: np.ndarray
    fweights: np.ndarray
    mvals: np.ndarray
    interfaces: np.ndarray
    m_ifc: np.ndarray
    zconst: float

    @property
    def weights(self) -> np.ndarray:
        """Plain-measure weights: sum weights*M(nodes)*f(nodes) ~ int f M dq."""
        return self.mweights / self.mvals

    @property
    def gaps(self) -> np.ndarray:
        return self.nodes[1:] - self.nodes[:-1]


def _axis_quadrature(b: float, order: int) -> AxisQuadrature:
    t, v = roots_jacobi(order, b / 2.0 - 1.0, b / 2.0 - 1.0)
    rb = math.sqrt(b)
    q = rb * t
    raw = rb * v
    body = 1.0 - q * q / b
    z = float(np.sum(raw * body))
    mw = raw * body / z
    fw = raw * q * q / z
    mvals = body ** (b / 2.0) / z
    ifc = np.concatenate(([-rb], 0.5 * (q[1:] + q[:-1]), [rb]))
    m_ifc = np.clip(1.0 - ifc * ifc / b, 0.0, None) ** (b / 2.0) / z
    return AxisQuadrature(
        b=b, n=order, nodes=q, mweights=mw, fweights=fw,
        mvals=mvals, interfaces=ifc, m_ifc=m_ifc, zconst=z,
    )


@dataclass(frozen=True, eq=False)
class DiskQuadrature:
    """Maxwellian-weighted rule on the d=2 ball: Jacobi radial x uniform angular."""

    b: float
    n_r: int
    n_a: int
    nodes: np.ndarray      # (n_r*n_a, 2)
    mweights: np.ndarray   # (n_r*n_a,)
    fweights: np.ndarray   # (n_r*n_a,) force-moment weights incl. r^2
    dirs: np.ndarray       # (n_r*n_a, 2) unit directions
    zconst: float

    @property
    def weights(self) -> np.ndarray:
        r2 = np.sum(self.nodes * self.nodes, axis=-1)
        mv = np.clip(1.0 - r2 / self.b, 0.0, None) ** (self.b / 2.0) / self.zconst
        return self.mweights / mv


def _disk_quadrature(b: float, order: int) -> DiskQuadrature:
    n_a = max(4, 2 * order)
    s, v = roots_jacobi(order, b / 2.0 - 1.0, 0.0)
    r2 = b * (1.0 + s) / 2.0
    r = np.sqrt(r2)
    raw = (b / 4.0) * v / 2.0 ** (b / 2.0 - 1.0)
    body = 1.0 - r2 / b
    z = float(2.0 * math.pi * np.sum(raw * body))
    ang = 2.0 * math.pi * np.arange(n_a) / n_a
    dirs = np.stack([np.cos(ang), np.sin(ang)], axis=-1)           # (n_a, 2)
    nodes = (r[:, None, None] * dirs[None, :, :]).reshape(-1, 2)
    w_ang = 2.0 * math.pi / n_a
    mw = (raw * body)[:, None] * w_ang / z
    fw = (raw * r2)[:, None] * w_ang / z
    return DiskQuadrature(
        b=b, n_r=order, n_a=n_a, nodes=nodes,
        mweights=np.broadcast_to(mw, (order, n_a)).ravel().copy(),
        fweights=np.broadcast_to(fw, (order, n_a)).ravel().copy(),
        dirs=np.broadcast_to(dirs[None, :, :], (order, n_a, 2)).reshape(-1, 2).copy(),
        zconst=z,
    )


@dataclass(frozen=True, eq=False)
class ProductQuadrature:
    """Tensor product of per-spring rules for the full configuration domain."""

    model: SpringModel
    axes: tuple
    order: int

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(ax.nodes.shape[0] for ax in self.axes)

    @property
    def nq_total(self) -> int:
        return int(np.prod(self.shape))

    @property
    def mweights_nd(self) -> np.ndarray:
        out = self.axes[0].mweights
        for ax in self.axes[1:]:
            out = np.multiply.outer(out, ax.mweights)
        return out

    @property
    def mvals_nd(self) -> np.ndarray:
        """Total Maxwellian M = prod M_i evaluated on the tensor node set."""
        if isinstance(self.axes[0], AxisQuadrature):
            out = self.axes[0].mvals
            mv = [ax.mvals for ax in self.axes[1:]]
        else:
            def disk_m(ax):
                r2 = np.sum(ax.nodes * ax.nodes, axis=-1)
                return np.clip(1.0 - r2 / ax.b, 0.0, None) ** (ax.b / 2.0) / ax.zconst
            out = disk_m(self.axes[0])
            mv = [disk_m(ax) for ax in self.axes[1:]]
        for m in mv:
            out = np.multiply.outer(out, m)
        return out

    @property
    def nodes(self) -> np.ndarray:
        """Flattened node coordinates, shape (nq_total, K*d)."""
        per_axis = []
        for ax in self.axes:
            pts = ax.nodes if ax.nodes.ndim == 2 else ax.nodes[:, None]
            per_axis.append(pts)
        grids = np.meshgrid(*[np.arange(p.shape[0]) for p in per_axis], indexing="ij")
        cols = [per_axis[i][g.ravel()] for i, g in enumerate(grids)]
        return np.concatenate(cols, axis=-1)


def build_quadrature(model: SpringModel, order: int) -> ProductQuadrature:
    """Product Maxwellian-weighted rule with `order` nodes per spring axis.

    Raises InvalidOrder below 2 nodes (interfaces and moments need at least
    that many).
    """
    if not isinstance(order, (int, np.integer)) or order < 2:
        raise InvalidOrder(f"quadrature order must be an integer >= 2, got {order!r}")
    if model.d == 1:
        axes = tuple(_axis_quadrature(bi, order) for bi in model.b)
    else:
        axes = tuple(_disk_quadrature(bi, order) for bi in model.b)
    return ProductQuadrature(model=model, axes=axes, order=order)


def total_maxwellian(qs, model: SpringModel):
    """M(q_1..q_K) = prod_i M_i(q_i); qs has shape (..., K) for d=1, (..., K, d) else."""
    qs = np.asarray(qs, dtype=float)
    out = None
    for i, bi in enumerate(model.b):
        qi = qs[..., i] if model.d == 1 else qs[..., i, :]
        mi = partial_maxwellian(qi, bi, model.d)
        out = mi if out is None else out * mi
    return out


@dataclass(frozen=True)
class PotentialCertificate:
    """Boundary-behavior certificate for one spring.

    theta = b/2; c1 <= M/dist^theta <= c2 and c3 <= dist*U' <= c4 near the
    boundary, plus finiteness of int (1 + U^2) M dq. The hypothesis set only
    applies for theta > 1, so the constants are NaN (and passed is False)
    when b <= 2.
    """

    b: float
    theta: float
    c1: float
    c2: float
    c3: float
    c4: float
    moment_bound: float
    passed: bool


def _certify_one(b: float, d: int) -> PotentialCertificate:
    theta = b / 2.0
    rb = math.sqrt(b)
    quad = _axis_quadrature(b, 64) if d == 1 else _disk_quadrature(b, 64)
    if d == 1:
        svals = quad.nodes * quad.nodes / 2.0
        mw = quad.mweights
    else:
        svals = np.sum(quad.nodes * quad.nodes, axis=-1) / 2.0
        mw = quad.mweights
    uvals = fene_potential(svals, b)
    moment = float(np.sum(mw * (1.0 + uvals * uvals)))

    if theta <= 1.0:
        nan = float("nan")
        return PotentialCertificate(b, theta, nan, nan, nan, nan, moment, False)

    def ratios(dist):
        # sample at |q| = rb - dist; the body 1 - |q|^2/b is evaluated in the
        # cancellation-free form dist*(2 rb - dist)/b, and dist*U' stays
        # bounded because the force pole and the boundary distance cancel
        body = dist * (2.0 * rb - dist) / b
        z = maxwellian_normalization(b, d)
        r1 = body**theta / z / dist**theta
        r2 = dist / body
        return r1, r2

    # interior sweep plus a dyadic ladder toward the boundary; min/max of the
    # two ratios must stabilize to 1e-8 between consecutive refinement levels
    samples = list(np.linspace(0.05 * rb, rb / 2.0, 32))
    lo1 = hi1 = lo2 = hi2 = None
    prev = None
    for level in range(1, 49):
        samples.append(0.05 * rb * 2.0**-level)
        dists = np.array(samples)
        r1, r2 = ratios(dists)
        cur = (r1.min(), r1.max(), r2.min(), r2.max())
        if prev is not None:
            rel = max(abs(c - p) / max(abs(p), 1e-300) for c, p in zip(cur, prev))
            if rel < 1e-8:
                lo1, hi1, lo2, hi2 = cur
                break
        prev = cur
    else:  # pragma: no cover - ladder always stabilizes for FENE
        lo1, hi1, lo2, hi2 = prev
    passed = (
        all(math.isfinite(c) and c > 0.0 for c in (lo1, hi1, lo2, hi2))
        and math.isfinite(moment)
    )
    return PotentialCertificate(b, theta, lo1, hi1, lo2, hi2, moment, passed)


def certify_potential(model: SpringModel) -> list[PotentialCertificate]:
    """Certificate per spring; a chain is admissible iff every spring passes."""
    return [_certify_one(bi, model.d) for bi in model.b]
