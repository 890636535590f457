"""Simulation and design tools for Stark-shift cross-phase modulation of
light stored in an atomic frequency comb memory."""

__version__ = "0.1.0"

SCHEMA_VERSION = 1
