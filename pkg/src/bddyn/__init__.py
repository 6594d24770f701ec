"""Equilibria, stability and Hopf analysis of a one-prey / two-predator model
with Beddington-DeAngelis responses."""

from .model import Params, table2

__all__ = ["Params", "table2"]
__version__ = "0.1.0"
