"""Particle-based Brownian simulator with porous spheroids.

Each particle carries a region label: 0 for the free medium and ``i + 1``
for the inside of spheroid ``i``.  A step draws a Gaussian displacement with
variance ``2 D dt`` per axis, ``D`` being the coefficient of the region the
particle starts in.  When the segment crosses a spheroid surface the part
beyond the crossing is rescaled by ``sqrt(D_dest / D_src)`` and followed
from the crossing point; this repeats for at most ``MAX_CROSSINGS``
crossings, after which the remaining step is cut at the boundary.  Inside a
degrading spheroid a particle is removed with probability ``k_f dt`` after
it moves.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..porosity import MediumSpec, SpheroidSpec, derive_porosity
from . import rng

__all__ = [
    "MAX_CROSSINGS",
    "PbsConfig",
    "Region",
    "Scenario",
    "ParticleEnsemble",
    "ProbeSphere",
    "ShellPair",
    "release_from_spheroid",
    "release_at_point",
    "uniform_ball",
    "step",
    "measure_probe",
    "measure_receiver_count",
    "count_shell",
    "run",
    "PbsRun",
]

MAX_CROSSINGS = 8


@dataclass(frozen=True)
class PbsConfig:
    dt: float = 0.5
    seed: int = 0
    particles: int = 100_000
    duration: float = 1000.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.particles < 1:
            raise ValueError("particles must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.duration < 0:
            raise ValueError("duration must be >= 0")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))


@dataclass(frozen=True)
class Region:
    """A spherical porous region in Cartesian coordinates."""

    center: np.ndarray
    radius: float
    diffusion: float
    degradation: float = 0.0

    @classmethod
    def from_spec(cls, spec: SpheroidSpec, medium: MediumSpec) -> "Region":
        por = derive_porosity(spec, medium)
        return cls(spec.center_cartesian, spec.radius, por.d_eff, spec.degradation_rate)


@dataclass
class Scenario:
    """Free medium plus non-overlapping spheroids."""

    medium: MediumSpec = field(default_factory=MediumSpec)
    regions: list = field(default_factory=list)

    def __post_init__(self):
        for i, a in enumerate(self.regions):
            for b in self.regions[i + 1 :]:
                if np.linalg.norm(a.center - b.center) <= a.radius + b.radius:
                    raise ValueError("spheroids must not overlap")

    @classmethod
    def from_specs(cls, medium: MediumSpec, *specs: SpheroidSpec) -> "Scenario":
        return cls(medium, [Region.from_spec(s, medium) for s in specs])

    def diffusion_table(self) -> np.ndarray:
        return np.array([self.medium.diffusion_coeff] + [r.diffusion for r in self.regions])

    def degradation_table(self) -> np.ndarray:
        return np.array([0.0] + [r.degradation for r in self.regions])

    def locate(self, positions) -> np.ndarray:
        """Region label of each position (closed balls)."""
        lab = np.zeros(len(positions), dtype=np.int8)
        for i, reg in enumerate(self.regions):
            inside = np.sum((positions - reg.center) ** 2, axis=1) <= reg.radius**2
            lab[inside] = i + 1
        return lab


@dataclass
class ParticleEnsemble:
    positions: np.ndarray
    alive: np.ndarray
    region: np.ndarray
    ids: np.ndarray
    time: float = 0.0
    step_index: int = 0

    @property
    def n_alive(self) -> int:
        return int(np.count_nonzero(self.alive))

    def copy(self) -> "ParticleEnsemble":
        return ParticleEnsemble(
            self.positions.copy(), self.alive.copy(), self.region.copy(), self.ids.copy(), self.time, self.step_index
        )


@dataclass(frozen=True)
class ProbeSphere:
    center: tuple
    radius: float = 10e-6

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("probe radius must be positive")

    @property
    def volume(self) -> float:
        return 4.0 / 3.0 * math.pi * self.radius**3


@dataclass(frozen=True)
class ShellPair:
    """Thin spherical shells just inside and outside a spheroid surface."""

    center: tuple
    radius: float
    width: float

    def volumes(self):
        g, w = self.radius, self.width
        inner = 4.0 / 3.0 * math.pi * (g**3 - (g - w) ** 3)
        outer = 4.0 / 3.0 * math.pi * ((g + w) ** 3 - g**3)
        return inner, outer


def uniform_ball(seed: int, ids, radius: float, center=(0.0, 0.0, 0.0), block: int = 0) -> np.ndarray:
    """Points uniform in a ball, one per id, from the placement stream."""
    u = rng.uniforms(seed, ids, rng.RELEASE_STREAM, block)
    r = radius * np.cbrt(u[0])
    cos_t = 2.0 * u[1] - 1.0
    sin_t = np.sqrt(np.maximum(1.0 - cos_t**2, 0.0))
    phi = 2.0 * math.pi * u[2]
    pts = np.stack([r * sin_t * np.cos(phi), r * sin_t * np.sin(phi), r * cos_t], axis=1)
    return pts + np.asarray(center, dtype=float)


def _ensemble(positions, scenario: Scenario | None) -> ParticleEnsemble:
    n = len(positions)
    region = scenario.locate(positions) if scenario is not None else np.zeros(n, dtype=np.int8)
    return ParticleEnsemble(positions, np.ones(n, dtype=bool), region, np.arange(n, dtype=np.uint64))


def release_from_spheroid(
    tx: SpheroidSpec, per_cell: int, seed: int = 0, scenario: Scenario | None = None, layouts: int = 1
) -> ParticleEnsemble:
    """``N_c`` cell centres uniform in the transmitter ball, ``per_cell`` particles at each.

    ``layouts > 1`` draws that many independent cell arrangements and
    releases from all of them.  Particles that share a cell are correlated,
    so spreading a particle budget over layouts keeps counts binomial
    around the expectation over cell positions.
    """
    if per_cell < 1 or int(per_cell) != per_cell:
        raise ValueError("per_cell must be a positive integer")
    if layouts < 1 or int(layouts) != layouts:
        raise ValueError("layouts must be a positive integer")
    if tx.cell_count < 1:
        raise ValueError("transmitter has no cells")
    n_cells = int(tx.cell_count) * int(layouts)
    cells = uniform_ball(seed, np.arange(n_cells, dtype=np.uint64), tx.radius, tx.center_cartesian)
    return _ensemble(np.repeat(cells, int(per_cell), axis=0), scenario)


def release_at_point(point, n: int, scenario: Scenario | None = None) -> ParticleEnsemble:
    pos = np.tile(np.asarray(point, dtype=float), (int(n), 1))
    return _ensemble(pos, scenario)


def _first_crossing(p, d, lab, regions):
    """Fraction ``t`` along ``d`` of the first surface crossing and the destination label.

    ``t = inf`` where the segment stays in its region.
    """
    n = len(p)
    t_hit = np.full(n, np.inf)
    dest = lab.copy()
    a = np.sum(d * d, axis=1)
    safe_a = np.where(a > 0, a, 1.0)
    for i, reg in enumerate(regions):
        q = p - reg.center
        b = np.sum(q * d, axis=1)
        cc = np.sum(q * q, axis=1) - reg.radius**2
        disc = b * b - a * cc
        sq = np.sqrt(np.maximum(disc, 0.0))
        inside = lab == i + 1
        # exit through the far root
        t_out = (-b + sq) / safe_a
        exit_ = inside & (a > 0) & (t_out < 1.0)
        t_out = np.maximum(t_out, 0.0)
        # entry through the near root, only while moving towards the centre
        t_in = (-b - sq) / safe_a
        entry = (lab == 0) & (disc > 0) & (b < 0) & (t_in <= 1.0)
        t_in = np.maximum(t_in, 0.0)
        t_i = np.where(exit_, t_out, np.where(entry, t_in, np.inf))
        better = t_i < t_hit
        t_hit = np.where(better, t_i, t_hit)
        dest = np.where(better, np.where(exit_, 0, i + 1), dest).astype(np.int8)
    return t_hit, dest


def step(ensemble: ParticleEnsemble, scenario: Scenario, config: PbsConfig) -> ParticleEnsemble:
    """Advance all alive particles by one time step (in place; also returned)."""
    idx = np.flatnonzero(ensemble.alive)
    if idx.size == 0:
        ensemble.step_index += 1
        ensemble.time += config.dt
        return ensemble
    dtab = scenario.diffusion_table()
    ktab = scenario.degradation_table()
    z, u = rng.normals_and_uniform(config.seed, ensemble.ids[idx], ensemble.step_index)
    p = ensemble.positions[idx]
    lab = ensemble.region[idx]
    d = z.T * np.sqrt(2.0 * dtab[lab] * config.dt)[:, None]
    if scenario.regions:
        active = np.arange(len(idx))
        for _ in range(MAX_CROSSINGS):
            t_hit, dest = _first_crossing(p[active], d[active], lab[active], scenario.regions)
            cross = np.isfinite(t_hit)
            done = active[~cross]
            p[done] += d[done]
            active = active[cross]
            if active.size == 0:
                break
            t_c = t_hit[cross][:, None]
            src, dst = lab[active], dest[cross]
            p[active] += t_c * d[active]
            d[active] = (1.0 - t_c) * d[active] * np.sqrt(dtab[dst] / dtab[src])[:, None]
            lab[active] = dst
        else:
            # crossing budget exhausted: stop at the next boundary
            if active.size:
                t_hit, _ = _first_crossing(p[active], d[active], lab[active], scenario.regions)
                t_c = np.where(np.isfinite(t_hit), t_hit, 1.0)[:, None]
                p[active] += t_c * d[active]
    else:
        p += d
    ensemble.positions[idx] = p
    ensemble.region[idx] = lab
    if np.any(ktab > 0):
        dies = u < ktab[lab] * config.dt
        ensemble.alive[idx[dies]] = False
    ensemble.step_index += 1
    ensemble.time += config.dt
    return ensemble


def measure_probe(ensemble: ParticleEnsemble, probe: ProbeSphere, normalization: float = 1.0, region_radius=None):
    """Alive particles inside ``probe`` divided by its volume and ``normalization``.

    ``region_radius`` is the radius of the spheroid being probed, used only
    to warn when the probe is coarse compared with that scale.
    """
    if region_radius is not None and probe.radius > region_radius / 10:
        warnings.warn("probe radius exceeds a tenth of the spheroid radius", stacklevel=2)
    count = _count_ball(ensemble, probe.center, probe.radius)
    return count / probe.volume / normalization


def _count_ball(ensemble, center, radius) -> int:
    pos = ensemble.positions[ensemble.alive]
    if pos.size == 0:
        return 0
    return int(np.count_nonzero(np.sum((pos - np.asarray(center, dtype=float)) ** 2, axis=1) <= radius**2))


def measure_receiver_count(ensemble: ParticleEnsemble, rx: SpheroidSpec) -> int:
    """Alive particles in the closed receiver ball."""
    return _count_ball(ensemble, rx.center_cartesian, rx.radius)


def count_shell(ensemble: ParticleEnsemble, shells: ShellPair):
    """Alive particle counts in the inner and outer shells."""
    pos = ensemble.positions[ensemble.alive]
    r = np.sqrt(np.sum((pos - np.asarray(shells.center, dtype=float)) ** 2, axis=1))
    g, w = shells.radius, shells.width
    inner = int(np.count_nonzero((r > g - w) & (r <= g)))
    outer = int(np.count_nonzero((r > g) & (r <= g + w)))
    return inner, outer


@dataclass
class PbsRun:
    """Counts recorded at ``times``; one row per step sample."""

    times: np.ndarray
    probes: dict
    receivers: dict
    shells: dict
    alive: np.ndarray
    n_initial: int


def run(
    scenario: Scenario,
    ensemble: ParticleEnsemble,
    config: PbsConfig,
    probes: dict | None = None,
    receivers: dict | None = None,
    shells: dict | None = None,
    every: int = 1,
) -> PbsRun:
    """Step for ``config.duration`` and record raw counts every ``every`` steps.

    ``probes`` maps names to :class:`ProbeSphere`, ``receivers`` to
    :class:`SpheroidSpec` and ``shells`` to :class:`ShellPair`.
    """
    probes, receivers, shells = probes or {}, receivers or {}, shells or {}
    n_steps = config.n_steps
    n_rec = n_steps // every
    times = np.empty(n_rec)
    pc = {k: np.zeros(n_rec, dtype=np.int64) for k in probes}
    rc = {k: np.zeros(n_rec, dtype=np.int64) for k in receivers}
    sc = {k: np.zeros((n_rec, 2), dtype=np.int64) for k in shells}
    alive = np.zeros(n_rec, dtype=np.int64)
    n0 = len(ensemble.alive)
    j = 0
    for s in range(1, n_steps + 1):
        step(ensemble, scenario, config)
        if s % every == 0 and j < n_rec:
            times[j] = ensemble.time
            for k, pr in probes.items():
                pc[k][j] = _count_ball(ensemble, pr.center, pr.radius)
            for k, rx in receivers.items():
                rc[k][j] = measure_receiver_count(ensemble, rx)
            for k, sh in shells.items():
                sc[k][j] = count_shell(ensemble, sh)
            alive[j] = ensemble.n_alive
            j += 1
    return PbsRun(times=times, probes=pc, receivers=rc, shells=sc, alive=alive, n_initial=n0)
