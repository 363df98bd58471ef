"""Rotating-SAR imaging with robust sparse azimuth filters."""

__version__ = "0.1.0"
