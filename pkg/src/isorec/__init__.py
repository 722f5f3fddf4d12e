"""Exact isomonodromic systems: rank-2 rational Lax pairs, their spectral
curves, and the topological recursion that reconstructs the WKB expansion."""

__version__ = "0.1.0"
