"""Finite-N and edge-scaled GOE/GSE matrix kernels and their gap probabilities."""

__version__ = "0.1.0"
