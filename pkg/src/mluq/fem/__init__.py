"""Plane-stress finite elements on regular quadrilateral grids.

Submodules
----------
elements
    Tensor-product Lagrange shape functions (order 1-5), Gauss rules,
    element stiffness and mass matrices.
mesh
    Level specifications for h/p hierarchies and structured beam meshes.
assembly
    Global assembly, Dirichlet elimination, static and harmonic solves.
"""

from .elements import (
    element_mass,
    element_stiffness,
    gauss_rule_2d,
    local_nodes,
    plane_stress_d,
    shape_functions,
)
from .mesh import LevelSpec, Mesh, MeshError, build_mesh, h_level, p_level
from .assembly import (
    ConstrainedSystem,
    MaterialSample,
    HarmonicParams,
    SingularSystemError,
    assemble_and_constrain,
    assemble_mass,
    assemble_stiffness,
    load_vector,
    min_wavelength,
    solve_dynamic,
    solve_static,
)

__all__ = [
    "ConstrainedSystem",
    "HarmonicParams",
    "LevelSpec",
    "MaterialSample",
    "Mesh",
    "MeshError",
    "SingularSystemError",
    "assemble_and_constrain",
    "assemble_mass",
    "assemble_stiffness",
    "build_mesh",
    "element_mass",
    "element_stiffness",
    "gauss_rule_2d",
    "h_level",
    "load_vector",
    "local_nodes",
    "min_wavelength",
    "p_level",
    "plane_stress_d",
    "shape_functions",
    "solve_dynamic",
    "solve_static",
]
