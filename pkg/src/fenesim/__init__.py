"""Micro-macro simulator for dilute FENE polymer fluids.

Couples a compressible isentropic Navier-Stokes solver to a Fokker-Planck
solver for FENE bead-spring chains, with diagnostics for the stiff-pressure
(congestion) limit gamma -> infinity.
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    config,
    coupled,
    diagnostics,
    fluid,
    io_formats,
    kinetic,
    limit,
    potentials,
    stress,
)
from .errors import FenesimError  # noqa: F401
