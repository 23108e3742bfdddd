"""Discrete approximations of the dual of generic conformally flat hypersurfaces in R^4."""
from .core import (BoundConstants, Domain, FrameSample, Lattice, ResidualReport, build_domain,
                   build_lattice, estimate_bound_constants)
from .samplers import CATALOGUE, CatalogueEntry, make_entry, validate_entry
from .invariants import (detect_degenerate, exact_dual, identity_residuals, principal_curvatures,
                         schouten_eigenvalues)
from .reference_dual import DualField, integrate_dual_edge, loop_residual, reference_dual_lattice
from .discrete_dual import DiscreteDualHypersurface, assemble, surface_xbar, surface_yunder
from .convergence import ConvergenceReport, cusp_experiment, fit_slope, sweep

__version__ = "0.1.0"
