"""Higher Berry curvature of parametrized families of uniform matrix product states."""

from .berry import (CurvatureEvaluator, CurvatureReport, berry_phase_0d, chern_number_0d,
                    curvature_tet, higher_berry_phase, invariant_3manifold, phi_triangle,
                    phi_triangle_unweighted, shell_estimate)
from .config import RunConfig, load_config, parse_config
from .geometry import (SimplicialComplex3, boundary_of_4simplex, cube_grid_complex,
                       prism_curvature_cell, prism_stack_complex, validate_closed)
from .model import ModelPoint, analytic_mps, hamiltonian, rotate_mps, site_unitary
from .mps import CanonicalMps, canonicalize, dense_state, entanglement_entropy, truncate
from .overlap import EdgeOverlap, OverlapCache, edge_overlap
from .solver import SolverOptions, energy_density, ground_state
from .transfer import TransferMap, apply_transfer, leading_eigenpair, subleading_modulus

__version__ = "0.1.0"

__all__ = [
    "analytic_mps",
    "apply_transfer",
    "berry_phase_0d",
    "boundary_of_4simplex",
    "canonicalize",
    "CanonicalMps",
    "chern_number_0d",
    "cube_grid_complex",
    "curvature_tet",
    "CurvatureEvaluator",
    "CurvatureReport",
    "dense_state",
    "edge_overlap",
    "EdgeOverlap",
    "energy_density",
    "entanglement_entropy",
    "ground_state",
    "hamiltonian",
    "higher_berry_phase",
    "invariant_3manifold",
    "leading_eigenpair",
    "load_config",
    "ModelPoint",
    "OverlapCache",
    "parse_config",
    "phi_triangle",
    "phi_triangle_unweighted",
    "prism_curvature_cell",
    "prism_stack_complex",
    "rotate_mps",
    "RunConfig",
    "shell_estimate",
    "SimplicialComplex3",
    "site_unitary",
    "SolverOptions",
    "subleading_modulus",
    "TransferMap",
    "truncate",
    "validate_closed",
]
