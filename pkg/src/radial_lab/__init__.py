"""Numerical laboratory for positive nondecreasing radial solutions of
semilinear Neumann problems on the unit ball.

The pipeline: a flux-form radial discretization whose solution operator
preserves the cone of nonnegative nondecreasing profiles, explicit a priori
bounds on all cone solutions, a truncation that tames arbitrary superlinear
growth, and a cone-constrained mountain-pass search certifying nonconstant
solutions when the slope at a constant equilibrium exceeds the second radial
Neumann eigenvalue.
"""

from .geometry import RadialFunction, RadialGrid, build_grid
from .kernels import HAVE_COMPILED

__version__ = "0.1.0"

__all__ = ["RadialFunction", "RadialGrid", "build_grid", "HAVE_COMPILED",
           "__version__"]
