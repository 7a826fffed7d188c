"""Finite-scale toolkit for ℓ^p quotient norms on hyperbolic graphs."""
from .graph import Graph, build_from_edges, distance, eta_geodesic_set, midpoint
from .groups import GroupSpec, cayley_ball, translate

__version__ = "0.1.0"

__all__ = [
    "Graph", "GroupSpec", "build_from_edges", "cayley_ball", "distance",
    "eta_geodesic_set", "midpoint", "translate",
]
