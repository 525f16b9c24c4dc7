"""Rydberg-dressed two-atom spin entanglement simulations."""
__version__ = "0.1.0"
