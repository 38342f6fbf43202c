"""Identifiability and estimation of spin-chain Hamiltonians seen through a single probe qubit."""

__version__ = "0.1.0"
