"""Stochastic LQ control of multi-agent systems with input-sum equality constraints."""
__version__ = "0.1.0"
