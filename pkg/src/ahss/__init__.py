"""Alternating HSS-type iterations with asynchronous runtimes and certificates."""

__version__ = "0.1.0"
