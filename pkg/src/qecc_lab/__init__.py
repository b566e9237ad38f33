"""Quantum error-correction lab: codes, noise, MWPM and transformer decoders."""

__version__ = "0.1.0"
