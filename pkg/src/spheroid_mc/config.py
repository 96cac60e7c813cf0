"""Experiment configuration loaded from YAML.

Lengths are given in micrometres in the file (keys ending in ``_um``) and
converted to metres here; every other quantity is SI.  Unknown keys are
rejected with a :class:`ConfigError` naming the offending key.  Example::

    transmitter: {radius_um: 275, cell_count: 24000, cell_volume: 3.14e-15, degradation_rate: 0.0}
    receiver:    {radius_um: 275, cell_count: 24000, cell_volume: 3.14e-15, degradation_rate: 0.01}
    medium:      {diffusion_coeff: 1.0e-9}
    separation_um: 1000
    grid: {dt: 0.5, omega_count: 16384, damping: 6.0, n_max: 60}
    ook:  {T_s: 600, N: 1, J: 5}
    pbs:  {seed: 0, particles: 100000, duration: 1000}
    output_dir: results

Omitted sections and keys keep the defaults above.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .errors import ConfigError, OverpackedSpheroid
from .gfc import DEFAULT_DAMPING, DEFAULT_N_MAX, DEFAULT_OMEGA_COUNT, FrequencyGrid
from .ook import MAX_MEMORY
from .porosity import TABLE1_CELL_VOLUME, TABLE1_CELLS, TABLE1_D, TABLE1_RADIUS, MediumSpec, SpheroidSpec

__all__ = [
    "SpheroidConfig",
    "GridConfig",
    "OokParams",
    "PbsParams",
    "ExperimentConfig",
    "load_config",
    "config_from_dict",
]

UM = 1e-6


@dataclass(frozen=True)
class SpheroidConfig:
    radius_um: float = round(TABLE1_RADIUS / UM, 9)
    cell_count: int = TABLE1_CELLS
    cell_volume: float = TABLE1_CELL_VOLUME
    degradation_rate: float = 0.0

    def spec(self, center=(0.0, 0.0, 0.0)) -> SpheroidSpec:
        return SpheroidSpec(self.radius_um * UM, self.cell_count, self.cell_volume, self.degradation_rate, center)


@dataclass(frozen=True)
class GridConfig:
    dt: float = 0.5
    omega_count: int = DEFAULT_OMEGA_COUNT
    damping: float = DEFAULT_DAMPING
    n_max: int = DEFAULT_N_MAX

    def frequency_grid(self, omega_count: int | None = None) -> FrequencyGrid:
        return FrequencyGrid(self.dt, omega_count or self.omega_count, self.damping)


@dataclass(frozen=True)
class OokParams:
    T_s: float = 600.0
    N: int = 1
    J: int = 5


@dataclass(frozen=True)
class PbsParams:
    seed: int = 0
    particles: int = 100_000
    duration: float = 1000.0


@dataclass(frozen=True)
class ExperimentConfig:
    """All inputs of a run; defaults reproduce the Table 1 setup."""

    transmitter: SpheroidConfig = field(default_factory=SpheroidConfig)
    receiver: SpheroidConfig = field(default_factory=lambda: SpheroidConfig(degradation_rate=0.01))
    medium: MediumSpec = field(default_factory=lambda: MediumSpec(TABLE1_D))
    separation_um: float = 1000.0
    grid: GridConfig = field(default_factory=GridConfig)
    ook: OokParams = field(default_factory=OokParams)
    pbs: PbsParams = field(default_factory=PbsParams)
    output_dir: str | None = None

    @property
    def separation(self) -> float:
        return self.separation_um * UM

    def tx_spec(self) -> SpheroidSpec:
        return self.transmitter.spec()

    def rx_spec(self, center=(0.0, 0.0, 0.0)) -> SpheroidSpec:
        return self.receiver.spec(center)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    def override(self, **flags) -> "ExperimentConfig":
        """Apply command-line overrides; ``None`` values are ignored."""
        cfg = self
        if flags.get("seed") is not None:
            cfg = replace(cfg, pbs=replace(cfg.pbs, seed=int(flags["seed"])))
        if flags.get("particles") is not None:
            cfg = replace(cfg, pbs=replace(cfg.pbs, particles=int(flags["particles"])))
        if flags.get("n_max") is not None:
            cfg = replace(cfg, grid=replace(cfg.grid, n_max=int(flags["n_max"])))
        if flags.get("T_s") is not None:
            cfg = replace(cfg, ook=replace(cfg.ook, T_s=float(flags["T_s"])))
        if flags.get("J") is not None:
            cfg = replace(cfg, ook=replace(cfg.ook, J=int(flags["J"])))
        if flags.get("output_dir") is not None:
            cfg = replace(cfg, output_dir=str(flags["output_dir"]))
        validate(cfg)
        return cfg


_SECTIONS = ("transmitter", "receiver", "medium", "grid", "ook", "pbs")


def _build(base, raw, where):
    """Copy of the dataclass ``base`` with the keys of ``raw`` replaced."""
    if raw is None:
        return base
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected a mapping")
    names = {f.name for f in dataclasses.fields(base)}
    kwargs = {}
    for key, value in raw.items():
        if key not in names:
            raise ConfigError(f"unknown key {where}.{key}")
        default = getattr(base, key)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}.{key}: expected a number, got {value!r}")
        if isinstance(default, int) and int(value) != value:
            raise ConfigError(f"{where}.{key}: expected an integer, got {value!r}")
        kwargs[key] = int(value) if isinstance(default, int) else float(value)
    try:
        return replace(base, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def config_from_dict(raw: dict | None) -> ExperimentConfig:
    """Build and validate an :class:`ExperimentConfig` from parsed YAML."""
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected a mapping")
    base = ExperimentConfig()
    kwargs = {}
    for key, value in raw.items():
        if key in _SECTIONS:
            kwargs[key] = _build(getattr(base, key), value, key)
        elif key == "separation_um":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"separation_um: expected a number, got {value!r}")
            kwargs[key] = float(value)
        elif key == "output_dir":
            kwargs[key] = None if value is None else str(value)
        else:
            raise ConfigError(f"unknown key {key}")
    cfg = replace(base, **kwargs)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    """Check every module invariant; raises :class:`ConfigError`."""
    for name in ("transmitter", "receiver"):
        sc = getattr(cfg, name)
        try:
            sc.spec()
        except OverpackedSpheroid as exc:
            raise ConfigError(f"{name}.cell_count: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"{name}: {exc}") from exc
    if not cfg.separation_um > cfg.transmitter.radius_um + cfg.receiver.radius_um:
        raise ConfigError("separation_um: spheroids overlap")
    g = cfg.grid
    if not g.dt > 0:
        raise ConfigError("grid.dt: must be positive")
    if g.omega_count < 1:
        raise ConfigError("grid.omega_count: must be >= 1")
    if g.damping < 0:
        raise ConfigError("grid.damping: must be >= 0")
    if g.n_max < 0:
        raise ConfigError("grid.n_max: must be >= 0")
    o = cfg.ook
    if not o.T_s > 0:
        raise ConfigError("ook.T_s: must be positive")
    if o.N < 1:
        raise ConfigError("ook.N: must be >= 1")
    if not 0 <= o.J <= MAX_MEMORY:
        raise ConfigError(f"ook.J: must lie in [0, {MAX_MEMORY}]")
    p = cfg.pbs
    if not 0 <= p.seed < 2**64:
        raise ConfigError("pbs.seed: must be a 64-bit unsigned integer")
    if p.particles < 1:
        raise ConfigError("pbs.particles: must be >= 1")
    if not p.duration > 0:
        raise ConfigError("pbs.duration: must be positive")


def load_config(path: str | Path | None) -> ExperimentConfig:
    """Read a YAML config; ``None`` gives the defaults."""
    if path is None:
        return ExperimentConfig()
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    return config_from_dict(raw)
