"""Flat key/value run configuration: schema, parsing, validation, presets.

The file format is one `section.key = value` pair per line, `#` comments,
no nesting and no environment overrides. Unknown keys, duplicate keys, type
errors, and constraint violations are all collected and reported together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .grid import Grid1D

__all__ = [
    "RunConfig",
    "default_config",
    "parse_config",
    "parse_config_file",
    "validate_config",
    "config_grid",
    "initial_profiles",
    "body_force",
    "format_config",
]


def _parse_bool(s: str) -> bool:
    low = s.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _parse_float(s: str) -> float:
    v = float(s)
    if math.isnan(v):
        raise ValueError("nan is not a valid value")
    return v


def _parse_floatlist(s: str) -> tuple[float, ...]:
    parts = [p for p in s.split(",") if p.strip()]
    if not parts:
        raise ValueError("expected a comma-separated list of numbers")
    return tuple(_parse_float(p.strip()) for p in parts)


def _parse_choice(options):
    def parse(s: str) -> str:
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}; got {s!r}")
        return s
    return parse


# key -> (dataclass field, parser). Defaults live on RunConfig itself.
_SCHEMA = {
    "grid.nx": ("nx", int),
    "grid.length": ("length", _parse_float),
    "grid.boundary": ("boundary", _parse_choice(("periodic", "wall"))),
    "spring.K": ("K", int),
    "spring.d": ("d", int),
    "spring.b": ("b", _parse_floatlist),
    "spring.nq": ("nq", int),
    "kinetic.epsilon": ("epsilon", _parse_float),
    "kinetic.lambda": ("lam", _parse_float),
    "kinetic.cutoff": ("cutoff", _parse_float),
    "kinetic.x_diffusion": ("x_diffusion", _parse_choice(("explicit", "implicit"))),
    "fluid.mu_s": ("mu_s", _parse_float),
    "fluid.mu_b": ("mu_b", _parse_float),
    "fluid.gamma": ("gamma", _parse_float),
    "fluid.xi": ("xi", _parse_float),
    "fluid.vacuum_floor": ("vacuum_floor", _parse_float),
    "fluid.well_balanced": ("well_balanced", _parse_bool),
    "fluid.rho_star": ("rho_star", _parse_float),
    "stress.k": ("k", _parse_float),
    "stress.c_eta": ("c_eta", _parse_float),
    "force.preset": ("force_preset", _parse_choice(("none", "constant", "sine"))),
    "force.amplitude": ("force_amplitude", _parse_float),
    "initial.preset": ("initial_preset",
                       _parse_choice(("uniform", "perturbed", "compression"))),
    "initial.rho0": ("rho0", _parse_float),
    "initial.amp_rho": ("amp_rho", _parse_float),
    "initial.amp_u": ("amp_u", _parse_float),
    "initial.amp_psi": ("amp_psi", _parse_float),
    "run.T": ("T", _parse_float),
    "run.cfl": ("cfl", _parse_float),
    "run.snapshot_every": ("snapshot_every", int),
    "run.dump_psi": ("dump_psi", _parse_bool),
    "run.threads": ("threads", int),
    "run.splitting": ("splitting", _parse_choice(("lie", "strang"))),
    "run.energy_constant": ("energy_constant", _parse_float),
    "sweep.gammas": ("gammas", _parse_floatlist),
    "sweep.delta": ("delta", _parse_float),
}

_FIELD_TO_KEY = {f: k for k, (f, _) in _SCHEMA.items()}


@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters; one flat object for every module.

    c_eta defaults to K+2, which makes the eta entropy coefficient
    k (c_eta - (K+1)) equal to k. A non-finite c_eta means "use the
    default"; validate_config resolves it.
    """

    nx: int = 128
    length: float = 1.0
    boundary: str = "periodic"
    K: int = 1
    d: int = 1
    b: tuple[float, ...] = (4.0,)
    nq: int = 32
    epsilon: float = 0.01
    lam: float = 1.0
    cutoff: float = math.inf
    x_diffusion: str = "explicit"
    mu_s: float = 1.0
    mu_b: float = 0.1
    gamma: float = 10.0
    xi: float = 1.0
    vacuum_floor: float = 1e-10
    well_balanced: bool = False
    rho_star: float = 1.0
    k: float = 1.0
    c_eta: float = math.inf
    force_preset: str = "none"
    force_amplitude: float = 0.0
    initial_preset: str = "uniform"
    rho0: float = 0.8
    amp_rho: float = 0.05
    amp_u: float = 0.05
    amp_psi: float = 0.05
    T: float = 0.1
    cfl: float = 0.4
    snapshot_every: int = 0
    dump_psi: bool = False
    threads: int = 1
    splitting: str = "lie"
    energy_constant: float = 200.0
    gammas: tuple[float, ...] = (5.0, 10.0, 20.0, 40.0, 80.0)
    delta: float = 0.01

    def resolved_c_eta(self) -> float:
        return float(self.K + 2) if math.isinf(self.c_eta) else self.c_eta


def default_config() -> RunConfig:
    return RunConfig()


def parse_config(text: str) -> RunConfig:
    """Parse and validate; raises ValidationError listing every problem."""
    errs: list[str] = []
    values: dict[str, object] = {}
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            errs.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        key = key.strip()
        val = val.strip()
        if key not in _SCHEMA:
            errs.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in seen:
            errs.append(f"line {lineno}: duplicate key {key!r} (first at line {seen[key]})")
            continue
        seen[key] = lineno
        fname, parser = _SCHEMA[key]
        try:
            values[fname] = parser(val)
        except ValueError as exc:
            errs.append(f"line {lineno}: {key}: {exc}")
    if errs:
        raise ValidationError(errs)
    cfg = replace(RunConfig(), **values)
    return validate_config(cfg)


def parse_config_file(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def validate_config(cfg: RunConfig) -> RunConfig:
    """Check every constraint; returns the config with c_eta resolved."""
    errs: list[str] = []

    def bad(field_name: str, msg: str):
        errs.append(f"{_FIELD_TO_KEY.get(field_name, field_name)}: {msg}")

    if cfg.nx < 4:
        bad("nx", f"need at least 4 cells, got {cfg.nx}")
    if not cfg.length > 0:
        bad("length", f"must be positive, got {cfg.length}")
    if cfg.K < 1:
        bad("K", f"need at least one spring, got {cfg.K}")
    if cfg.d != 1:
        bad("d", f"runs support configuration dimension 1, got {cfg.d}")
    blist = cfg.b
    if len(blist) not in (1, max(cfg.K, 1)):
        bad("b", f"need 1 or K={cfg.K} extensibility values, got {len(blist)}")
    for bv in blist:
        if not bv > 2.0:
            bad("b", f"finite extensibility requires b > 2, got {bv}")
    if cfg.nq < 2:
        bad("nq", f"need at least 2 quadrature nodes per spring, got {cfg.nq}")
    if not (cfg.epsilon > 0 and math.isfinite(cfg.epsilon)):
        bad("epsilon", f"must be positive and finite, got {cfg.epsilon}")
    if not (cfg.lam > 0 and math.isfinite(cfg.lam)):
        bad("lam", f"must be positive and finite, got {cfg.lam}")
    if not cfg.cutoff > 1.0:
        bad("cutoff", f"cutoff level must exceed 1, got {cfg.cutoff}")
    if not (cfg.mu_s > 0 and math.isfinite(cfg.mu_s)):
        bad("mu_s", f"must be positive and finite, got {cfg.mu_s}")
    if not (cfg.mu_b >= 0 and math.isfinite(cfg.mu_b)):
        bad("mu_b", f"must be nonnegative and finite, got {cfg.mu_b}")
    if not (cfg.gamma > 1.5 and math.isfinite(cfg.gamma)):
        bad("gamma", f"adiabatic exponent must exceed 3/2, got {cfg.gamma}")
    if not (cfg.xi >= 0 and math.isfinite(cfg.xi)):
        bad("xi", f"must be nonnegative and finite, got {cfg.xi}")
    if not 0 < cfg.vacuum_floor < 1e-2:
        bad("vacuum_floor", f"must lie in (0, 1e-2), got {cfg.vacuum_floor}")
    if not (cfg.rho_star > 0 and math.isfinite(cfg.rho_star)):
        bad("rho_star", f"congestion threshold must be positive, got {cfg.rho_star}")
    if not (cfg.k > 0 and math.isfinite(cfg.k)):
        bad("k", f"must be positive and finite, got {cfg.k}")
    if math.isfinite(cfg.c_eta) and not cfg.c_eta >= cfg.K + 1:
        bad("c_eta", f"must be at least K+1 = {cfg.K + 1}, got {cfg.c_eta}")
    if not math.isfinite(cfg.force_amplitude):
        bad("force_amplitude", "must be finite")
    if not (cfg.T >= 0 and math.isfinite(cfg.T)):
        bad("T", f"final time must be nonnegative and finite, got {cfg.T}")
    if not 0 < cfg.cfl <= 1.0:
        bad("cfl", f"must lie in (0, 1], got {cfg.cfl}")
    if cfg.snapshot_every < 0:
        bad("snapshot_every", f"must be nonnegative, got {cfg.snapshot_every}")
    if cfg.threads < 1:
        bad("threads", f"need at least one thread, got {cfg.threads}")
    if not (cfg.energy_constant > 0 and math.isfinite(cfg.energy_constant)):
        bad("energy_constant", f"must be positive and finite, got {cfg.energy_constant}")
    if len(cfg.gammas) == 0:
        bad("gammas", "need at least one exponent")
    else:
        if any(not (g > 1.5 and math.isfinite(g)) for g in cfg.gammas):
            bad("gammas", f"every exponent must exceed 3/2, got {cfg.gammas}")
        if any(b <= a for a, b in zip(cfg.gammas, cfg.gammas[1:])):
            bad("gammas", f"exponents must be strictly ascending, got {cfg.gammas}")
    if not 0 < cfg.delta < 1:
        bad("delta", f"congestion indicator width must lie in (0,1), got {cfg.delta}")
    if not (0 <= cfg.amp_psi < 1):
        bad("amp_psi", f"must lie in [0, 1) to keep psi_hat nonnegative, got {cfg.amp_psi}")
    for name in ("rho0", "amp_rho", "amp_u"):
        if not math.isfinite(getattr(cfg, name)):
            bad(name, "must be finite")

    if not errs:
        try:
            rho0 = initial_profiles(cfg)[0]
        except ValidationError as exc:
            errs.extend(exc.violations)
        else:
            mean = float(np.mean(rho0))
            if not 0.0 < mean < 1.0:
                bad("rho0", f"mean initial density must lie strictly in (0,1), got {mean:g}")
            if np.any(rho0 < 0.0):
                bad("amp_rho", "initial density dips below zero")
    if errs:
        raise ValidationError(errs)
    return replace(cfg, c_eta=cfg.resolved_c_eta())


def config_grid(cfg: RunConfig) -> Grid1D:
    return Grid1D(nx=cfg.nx, length=cfg.length, boundary=cfg.boundary)


def initial_profiles(cfg: RunConfig) -> tuple[np.ndarray, np.ndarray]:
    """(rho0, u0) on the configured grid for the selected preset.

    uniform:     rho = rho0, u = 0.
    perturbed:   mean-zero cosine density ripple plus a sine velocity.
    compression: cosine bump centered in the domain with velocity pointing
                 at the center, the scenario that drives rho toward the
                 congestion threshold.
    """
    grid = config_grid(cfg)
    x = grid.centers / cfg.length
    if cfg.initial_preset == "uniform":
        rho = np.full(grid.nx, cfg.rho0)
        u = np.zeros(grid.nx)
    elif cfg.initial_preset == "perturbed":
        rho = cfg.rho0 + cfg.amp_rho * np.cos(2.0 * np.pi * x)
        u = cfg.amp_u * np.sin(2.0 * np.pi * x)
    else:
        rho = cfg.rho0 + cfg.amp_rho * np.cos(2.0 * np.pi * (x - 0.5))
        u = -cfg.amp_u * np.sin(2.0 * np.pi * (x - 0.5))
    return rho, u


def body_force(cfg: RunConfig):
    """Body force callable f(x, t) for the configured preset, or None."""
    amp = cfg.force_amplitude
    if cfg.force_preset == "none" or amp == 0.0:
        return None
    if cfg.force_preset == "constant":
        return lambda x, t: np.full_like(np.asarray(x, dtype=float), amp)
    L = cfg.length
    return lambda x, t: amp * np.sin(2.0 * np.pi * np.asarray(x, dtype=float) / L)


def format_config(cfg: RunConfig) -> str:
    """Render a config back to the flat text format (defaults included)."""
    lines = []
    for key, (fname, _) in _SCHEMA.items():
        val = getattr(cfg, fname)
        if isinstance(val, tuple):
            text = ",".join(f"{v:g}" for v in val)
        elif isinstance(val, bool):
            text = "true" if val else "false"
        elif isinstance(val, float):
            text = f"{val:.17g}"
        else:
            text = str(val)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"
