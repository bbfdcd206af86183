"""Clifford commutant algebra, approximate-design diagnostics, and the
Bell-difference distinguisher, with seeded experiment drivers."""

__version__ = "0.1.0"
