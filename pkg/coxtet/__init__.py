"""
coxtet - enumeration and verification of Coxeter decompositions of hyperbolic tetrahedra.
"""

__version__ = "0.1.0"
