"""Deterministic round-based simulator for LOCAL/CONGEST message passing plus
parameterized graph-optimization algorithms, lower-bound constructions and
search drivers."""

__version__ = "0.1.0"
