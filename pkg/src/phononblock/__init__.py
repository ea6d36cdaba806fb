"""Phonon antibunching in coupled nonlinear mechanical resonators."""

__version__ = "0.1.0"
