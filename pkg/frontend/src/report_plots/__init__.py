"""Post-processing figures for fenesim CSV outputs.

Reads the simulator's frozen plain-text schemas (sweep tables, per-step
diagnostics, snapshots) and renders the standard figures: excess-norm and
complementarity decay over the exponent ladder, energy/dissipation time
series, and final profiles with the near-congested region shaded. This
package only consumes the documented wire formats; it never imports the
simulator and never computes new physics numbers.
"""

from .errors import EmptyInput, SchemaError
from .figures import FigureSpec, plot_run, plot_sweep
from .schemas import (DIAGNOSTIC_COLUMNS, SNAPSHOT_COLUMNS, SWEEP_COLUMNS,
                      latest_snapshot, read_diagnostics, read_snapshot, read_sweep)

__all__ = [
    "EmptyInput",
    "SchemaError",
    "FigureSpec",
    "plot_run",
    "plot_sweep",
    "DIAGNOSTIC_COLUMNS",
    "SNAPSHOT_COLUMNS",
    "SWEEP_COLUMNS",
    "latest_snapshot",
    "read_diagnostics",
    "read_snapshot",
    "read_sweep",
]

__version__ = "0.1.0"
