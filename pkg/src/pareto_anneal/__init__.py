"""Scalarization-based Pareto-front generation for multi-objective weighted max-cut."""

__version__ = "0.1.0"
