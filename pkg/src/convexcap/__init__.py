"""Convex caps with a prescribed polyhedral metric on their upper boundary."""

__version__ = "0.1.0"
