"""Verification, search, simulation and cost modeling for magic-state distillation sequences."""

__version__ = "0.1.0"
