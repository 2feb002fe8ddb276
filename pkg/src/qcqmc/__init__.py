"""Hybrid quantum-classical AFQMC driven by Matchgate classical shadows."""

__version__ = "0.1.0"
