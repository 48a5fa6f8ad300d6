"""Randomness extraction toolkit: extractors, non-malleable extraction, MACs and privacy amplification."""

__version__ = "0.1.0"
