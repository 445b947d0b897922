"""Functional no-signalling boxes over Z_p: exact models, wirings, and
information-causality bounds."""

__version__ = "0.1.0"
