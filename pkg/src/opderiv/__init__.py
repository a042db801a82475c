"""Block-matrix commutators with a self-adjoint operator, weak and strong
differentiability, and the circle examples built on them."""

__version__ = "0.1.0"

SCHEMA = "opderiv/1"
