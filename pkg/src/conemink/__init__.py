"""Minkowski problems for pseudo cones.

Cones are stored in an internal frame in which the axis ``u_*`` is ``-e_1``;
every vector handled by the library (cut normals, measure directions) is in
that frame.  JSON documents written by :mod:`conemink.io` use user
coordinates.
"""

from .cone import Cone, delta_boundary, dual_cone, projected_domain
from .errors import ConeminkError, ConvergenceError, PreconditionError
from .families import LayerFamily, TailFamily
from .functionals import LayerProfile, convert, gamma_functional, j_functional, schneider_bound
from .ma import ConvexPLFunction, SolverOptions, blaschke_sum, solve, solve_dirichlet, solve_dominated
from .mink2d import AngularMeasure, approximate2d, condition_value, necessity_check, solve2d
from .pseudocone import PseudoCone, is_asymptotic, minkowski_sum, support
from .sam import DiscreteMeasure, ma_pullback, surface_measure

__version__ = "0.1.0"

__all__ = [
    "AngularMeasure", "Cone", "ConeminkError", "ConvergenceError", "ConvexPLFunction", "DiscreteMeasure",
    "LayerFamily", "LayerProfile", "PreconditionError", "PseudoCone", "SolverOptions", "TailFamily",
    "approximate2d", "blaschke_sum", "condition_value", "convert", "delta_boundary", "dual_cone",
    "gamma_functional", "is_asymptotic", "j_functional", "ma_pullback", "minkowski_sum",
    "necessity_check", "projected_domain", "schneider_bound", "solve", "solve2d", "solve_dirichlet",
    "solve_dominated", "support", "surface_measure",
]
