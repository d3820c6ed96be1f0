"""Sundman-transformation linearisation of second-order ODEs."""

__version__ = "0.1.0"
