"""Damped linear wave systems on directed networks."""

__version__ = "0.1.0"
