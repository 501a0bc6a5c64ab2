"""Numerical laboratory for small-scale equidistribution of arithmetic point sets.

Lattice points on spheres, Heegner points and closed geodesics on the modular
surface, Selberg/Harish-Chandra transforms, and the variance of counts in
shrinking annuli computed by Monte Carlo and by an exact spectral route.
"""

from equidist.errors import DomainError, ResourceCapError

__version__ = "0.1.0"

__all__ = ["DomainError", "ResourceCapError", "__version__"]
