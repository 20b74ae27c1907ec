"""Iterated prisoner's dilemma with an outside option: payoffs, replicator dynamics, equilibria."""

__version__ = "0.1.0"
