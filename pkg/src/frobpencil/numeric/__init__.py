"""Polynomial, series and root-finding utilities."""
from .polynomial import Polynomial, poly_roots

__all__ = ["Polynomial", "poly_roots"]
