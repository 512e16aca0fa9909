"""Numerical toolkit and Monte Carlo simulator for covert communication over additive-noise channels."""

__version__ = "0.1.0"
