"""Exact polyhedral convex duality toolkit.

Conjugates, sandwich separators, and LP-certified verification of convex
duality identities on finite-dimensional polyhedral instances.
"""
__version__ = "0.1.0"
