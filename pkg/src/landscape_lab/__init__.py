"""Numerical laboratory for the loss landscapes of shallow networks."""

__version__ = "0.1.0"
SPEC_VERSION = "1.0"
