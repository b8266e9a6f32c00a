"""Stochastic approximation under sharp objectives: algorithms, checks and experiments."""

__version__ = "0.1.0"
