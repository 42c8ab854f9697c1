"""Variational quantum solvers for the lattice shortest vector problem."""

__version__ = "0.1.0"
