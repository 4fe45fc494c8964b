"""Validated-numerics verifier for the spectral stability of periodic
roll waves of the KdV-KS equation in the KdV limit."""

__version__ = "0.1.0"
