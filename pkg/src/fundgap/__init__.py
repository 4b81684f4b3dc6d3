"""Finite element laboratory for Dirichlet, Neumann and Bakry-Emery eigenvalue gaps."""

__version__ = "0.1.0"
