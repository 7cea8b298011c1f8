"""Numerical lab for a pseudo-Hermitian von Neumann-Wigner Hamiltonian with exceptional points."""

__version__ = "0.1.0"
