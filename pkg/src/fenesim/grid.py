"""Uniform 1-D physical grid with periodic or wall boundaries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, ValidationError

__all__ = ["Grid1D"]


@dataclass(frozen=True)
class Grid1D:
    """Cell-centered finite-volume grid on [0, length].

    boundary is either "periodic" or "wall". Wall mode closes the domain:
    advective and diffusive fluxes vanish at the two outer interfaces and
    gradients fall back to one-sided stencils there.
    """

    nx: int
    length: float = 1.0
    boundary: str = "periodic"
    dx: float = field(init=False)

    def __post_init__(self):
        if self.nx < 4:
            raise ValidationError([f"grid.nx: need at least 4 cells, got {self.nx}"])
        if self.length <= 0:
            raise ValidationError([f"grid.length: must be positive, got {self.length}"])
        if self.boundary not in ("periodic", "wall"):
            raise ValidationError(
                [f"grid.boundary: expected 'periodic' or 'wall', got {self.boundary!r}"]
            )
        object.__setattr__(self, "dx", self.length / self.nx)

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    def check_field(self, f: np.ndarray, name: str = "field") -> None:
        if f.shape[0] != self.nx:
            raise GridMismatch(f"{name}: leading dimension {f.shape[0]} != nx {self.nx}")

    def interface_values(self, f: np.ndarray) -> np.ndarray:
        """Arithmetic average of a cell field onto the nx+1 interfaces.

        Interface j sits between cells j-1 and j; interfaces 0 and nx are the
        domain ends (identical in periodic mode).
        """
        out = np.empty(self.nx + 1)
        out[1:-1] = 0.5 * (f[:-1] + f[1:])
        if self.periodic:
            out[0] = out[-1] = 0.5 * (f[-1] + f[0])
        else:
            out[0] = f[0]
            out[-1] = f[-1]
        return out

    def flux_divergence(self, flux: np.ndarray) -> np.ndarray:
        """(F_{j+1/2} - F_{j-1/2}) / dx for interface fluxes of shape (nx+1, ...)."""
        return (flux[1:] - flux[:-1]) / self.dx

    def gradient(self, f: np.ndarray) -> np.ndarray:
        """Node-centered gradient: centered in the interior, one-sided at walls."""
        out = np.empty_like(f, dtype=float)
        out[1:-1] = (f[2:] - f[:-2]) / (2.0 * self.dx)
        if self.periodic:
            out[0] = (f[1] - f[-1]) / (2.0 * self.dx)
            out[-1] = (f[0] - f[-2]) / (2.0 * self.dx)
        else:
            out[0] = (f[1] - f[0]) / self.dx
            out[-1] = (f[-1] - f[-2]) / self.dx
        return out

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        """Conservative second difference; zero-flux closure at walls."""
        right = np.roll(f, -1, axis=0)
        left = np.roll(f, 1, axis=0)
        out = (right - 2.0 * f + left) / self.dx**2
        if not self.periodic:
            # zero diffusive flux through the walls
            out[0] = (f[1] - f[0]) / self.dx**2
            out[-1] = (f[-2] - f[-1]) / self.dx**2
        return out

    def integrate(self, f: np.ndarray) -> float:
        return float(np.sum(f) * self.dx)
