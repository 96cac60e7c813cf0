"""Spheroid geometry and homogenised porous-medium parameters.

A spheroid of radius ``R`` packed with ``N_c`` cells of volume ``V_c`` is
treated as a homogeneous porous sphere with

    epsilon = 1 - N_c V_c / (4/3 pi R^3)       porosity
    tau     = epsilon^(-1/2)                   tortuosity
    D_eff   = (epsilon / tau) D = epsilon^(3/2) D
    kappa   = sqrt(D / D_eff)                  boundary concentration ratio

``kappa`` is the jump ``c_inside = kappa * c_outside`` at the surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import OverpackedSpheroid

__all__ = [
    "SpheroidSpec",
    "MediumSpec",
    "DerivedPorosity",
    "derive_porosity",
    "spheroid_volume",
    "cells_for_porosity",
    "kappa_curve",
    "TABLE1_RADIUS",
    "TABLE1_CELL_VOLUME",
    "TABLE1_CELLS",
    "TABLE1_D",
]

TABLE1_RADIUS = 275e-6
TABLE1_CELL_VOLUME = 3.14e-15
TABLE1_CELLS = 24000
TABLE1_D = 1e-9


def spheroid_volume(radius: float) -> float:
    return 4.0 / 3.0 * math.pi * radius**3


@dataclass(frozen=True)
class SpheroidSpec:
    """Geometry and chemistry of one spheroid.

    Parameters
    ----------
    radius : float
        Radius in m.
    cell_count : int
        Number of cells ``N_c``; zero gives an empty (free-medium) sphere.
    cell_volume : float
        Volume of one cell in m^3.
    degradation_rate : float
        First-order loss rate ``k_f`` inside the spheroid, 1/s.
    center : tuple of float
        Spherical coordinates ``(r, theta, phi)`` of the centre, m and rad.
    """

    radius: float
    cell_count: int = 0
    cell_volume: float = TABLE1_CELL_VOLUME
    degradation_rate: float = 0.0
    center: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius!r}")
        if not self.cell_volume > 0:
            raise ValueError(f"cell_volume must be positive, got {self.cell_volume!r}")
        if self.degradation_rate < 0:
            raise ValueError("degradation_rate must be >= 0")
        if int(self.cell_count) != self.cell_count or self.cell_count < 0:
            raise ValueError("cell_count must be a non-negative integer")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.cell_count * self.cell_volume >= spheroid_volume(self.radius):
            raise OverpackedSpheroid(
                f"{self.cell_count} cells of {self.cell_volume:g} m^3 do not fit in a "
                f"sphere of radius {self.radius:g} m"
            )

    @property
    def volume(self) -> float:
        return spheroid_volume(self.radius)

    @property
    def center_cartesian(self) -> np.ndarray:
        r, th, ph = self.center
        return np.array([r * math.sin(th) * math.cos(ph), r * math.sin(th) * math.sin(ph), r * math.cos(th)])

    def with_cells(self, cell_count: int) -> "SpheroidSpec":
        return replace(self, cell_count=int(cell_count))


@dataclass(frozen=True)
class MediumSpec:
    """Free fluid surrounding the spheroids."""

    diffusion_coeff: float = TABLE1_D

    def __post_init__(self):
        if not self.diffusion_coeff > 0:
            raise ValueError("diffusion_coeff must be positive")


@dataclass(frozen=True)
class DerivedPorosity:
    epsilon: float
    tortuosity: float
    d_eff: float
    kappa: float = field(init=False)
    d_free: float = field(default=TABLE1_D)

    def __post_init__(self):
        # kappa is always derived from d_eff so the two cannot disagree
        object.__setattr__(self, "kappa", math.sqrt(self.d_free / self.d_eff))


def derive_porosity(spec: SpheroidSpec, medium: MediumSpec) -> DerivedPorosity:
    """Porosity, tortuosity, effective diffusivity and ``kappa`` of a spheroid.

    Raises
    ------
    OverpackedSpheroid
        If the cells fill the whole sphere (checked again here for specs
        built without validation).
    """
    occupied = spec.cell_count * spec.cell_volume
    vol = spec.volume
    if occupied >= vol:
        raise OverpackedSpheroid("cells fill the spheroid volume")
    eps = 1.0 - occupied / vol
    tau = eps**-0.5
    d_eff = eps / tau * medium.diffusion_coeff
    return DerivedPorosity(epsilon=eps, tortuosity=tau, d_eff=d_eff, d_free=medium.diffusion_coeff)


def cells_for_porosity(epsilon: float, radius: float, cell_volume: float) -> int:
    """Nearest integer cell count giving porosity ``epsilon``."""
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    return int(round((1.0 - epsilon) * spheroid_volume(radius) / cell_volume))


def kappa_curve(cell_counts, radius=TABLE1_RADIUS, cell_volume=TABLE1_CELL_VOLUME, diffusion=TABLE1_D):
    """Porosity and ``kappa`` over a range of cell counts; returns ``(eps, kappa)`` arrays."""
    counts = np.asarray(cell_counts, dtype=float)
    if np.any(counts * cell_volume >= spheroid_volume(radius)):
        raise OverpackedSpheroid("cell count range overpacks the spheroid")
    eps = 1.0 - counts * cell_volume / spheroid_volume(radius)
    kappa = np.sqrt(diffusion / (eps**1.5 * diffusion))
    return eps, kappa
