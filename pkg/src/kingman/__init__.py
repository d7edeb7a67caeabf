"""Simulation and verification toolkit for the external branch lengths of
Kingman's coalescent."""

__version__ = "0.1.0"

from . import batch, coalescent, moments, stats, urn, verify  # noqa: F401,E402
