"""Particle-based simulator and its counter-based random streams."""

from .rng import normals_and_uniform, philox4x32, uniforms
from .simulator import *  # noqa: F401,F403
from .simulator import __all__ as _sim_all

__all__ = ["philox4x32", "uniforms", "normals_and_uniform"] + list(_sim_all)
