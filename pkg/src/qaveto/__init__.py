"""Simulation and verification suite for quantum anonymous veto protocols."""

__version__ = "0.1.0"
