"""Numerics for super cusp forms on the complex unit ball."""

from .domain import GroupElement, Quadrature, SuperFunction, lift, petersson_pair, slash
from .superalg import DiagonalPhase, Multivector, SubsetIndex

__version__ = "0.1.0"

__all__ = [
    "DiagonalPhase",
    "GroupElement",
    "Multivector",
    "Quadrature",
    "SubsetIndex",
    "SuperFunction",
    "lift",
    "petersson_pair",
    "slash",
]
