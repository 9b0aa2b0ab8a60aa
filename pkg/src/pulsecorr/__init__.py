"""Entanglement degradation of squeezed-vacuum pulses in lossy dispersive channels."""

__version__ = "0.1.0"
