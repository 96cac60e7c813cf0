"""Diffusive molecular communication between porous spheroidal cell aggregates."""

__version__ = "0.1.0"
