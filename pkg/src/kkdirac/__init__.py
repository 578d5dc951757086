"""Exact Kaluza-Klein reduction of the six-dimensional Dirac operator on M x S^3."""

__version__ = "0.1.0"
