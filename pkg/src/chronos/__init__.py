"""Numerical laboratory for quantum time operators on discretized 1-D Hilbert spaces."""

__version__ = "0.1.0"
