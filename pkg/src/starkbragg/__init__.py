"""Optically controlled zero-absorption index gratings in driven multilevel atoms."""

__version__ = "0.1.0"
