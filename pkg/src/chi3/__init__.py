"""Quantum noise of light in a driven cavity with a transparent Kerr medium."""
__version__ = "0.1.0"
