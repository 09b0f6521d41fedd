"""Exact computations for flows of coclosed G2-structures on a contact Calabi–Yau model."""

from .scalar import MODE, Q, Laurent, set_mode

__version__ = "0.1.0"

__all__ = ["MODE", "Q", "Laurent", "set_mode", "__version__"]
