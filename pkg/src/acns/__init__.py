"""Pseudo-spectral laboratory for the artificial-compressibility
approximation of the incompressible Navier-Stokes equations."""

__version__ = "0.1.0"

from .grid import Grid
from .fields import ScalarField, VectorField

__all__ = ["Grid", "ScalarField", "VectorField", "__version__"]
