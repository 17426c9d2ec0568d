"""Frobenius-manifold structures on spaces of abelian integrals."""
__version__ = "0.1.0"
