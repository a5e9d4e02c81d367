"""Exact-arithmetic homological algebra workbench.

Computes with exterior algebras, square-zero extensions and their
resolution complexes, Cech data on finite nerves, and verifies a battery
of chain-level identities by exact rational linear algebra.
"""

__version__ = "0.1.0"
