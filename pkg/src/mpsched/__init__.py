"""Deterministic discrete-event simulator of multipath transport scheduling."""

__version__ = "0.1.0"
