"""Numerical laboratory for random band matrices on the discrete torus."""
__version__ = "0.1.0"
