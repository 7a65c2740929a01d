"""Virtual element discretization of the 2D resistive-MHD electromagnetic fields on polygonal meshes.

Submodules
----------
mesh        polygonal meshes, generators, regularity, text I/O
polyquad    scaled monomials and polygon/edge quadrature
derham      nodal / edge / cell spaces and the rot, div chain maps
projectors  per-cell reconstructions and edge projections
products    stabilized local Grams and global assembly
fluid       velocity/pressure pair and inf-sup probe
krylov      GMRES and inexact Newton with adaptive forcing
solver      theta-scheme stepping by Jacobian-free Newton-Krylov
app         experiments, file export and the command line
"""
from .derham import FieldE, FieldP, FieldV, div_map, interp_E, interp_P, interp_V, rot_map
from .mesh import PolyMesh, check_regularity, gen_center_refined, gen_perturbed_quads, gen_triangular, gen_voronoi
from .products import EMOperators
from .solver import EMProblem, EMState, SolverConfig

__version__ = "0.1.0"

__all__ = [
    "PolyMesh",
    "check_regularity",
    "gen_triangular",
    "gen_perturbed_quads",
    "gen_voronoi",
    "gen_center_refined",
    "FieldV",
    "FieldE",
    "FieldP",
    "interp_V",
    "interp_E",
    "interp_P",
    "rot_map",
    "div_map",
    "EMOperators",
    "EMProblem",
    "EMState",
    "SolverConfig",
]
