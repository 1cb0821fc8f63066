"""Numerical laboratory for residue currents.

Evaluates regularized residue and principal-value integrals of one or two
holomorphic section tuples, compares them against exact monomial oracles,
and measures convergence, discontinuity and Holder continuity in the
regularization parameters.
"""

__version__ = "0.1.0"
