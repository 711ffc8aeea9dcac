"""Decentralized derivative-free optimization by direct search."""

__version__ = "0.1.0"
