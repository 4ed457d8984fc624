"""Mediator gadgets for all-to-all Ising simulation: design, bounds and exact checks."""

__version__ = "0.1.0"
