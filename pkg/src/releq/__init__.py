"""Relative equilibria of SO(3)-invariant Hamiltonians near zero momentum."""

__version__ = "0.1.0"
