"""Global assembly, constraint elimination, and linear solves.

Every element of a structured beam mesh shares the same rectangle
geometry, so global stiffness assembly reduces to scaling precomputed
per-Gauss-point unit-Young blocks by the sampled modulus and scattering
them into a sparse matrix with cached index arrays.  Solvers are sparse
direct factorizations (real for static, complex for harmonic).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .elements import reference_gp_stiffness
from .mesh import Mesh

__all__ = [
    "ConstrainedSystem",
    "HarmonicParams",
    "MaterialSample",
    "SingularSystemError",
    "assemble_and_constrain",
    "assemble_mass",
    "assemble_stiffness",
    "load_vector",
    "min_wavelength",
    "solve_dynamic",
    "solve_static",
]

_STATIC_RESIDUAL_TOL = 1e-10
_DYNAMIC_RESIDUAL_TOL = 1e-9


class SingularSystemError(RuntimeError):
    """Constrained system is singular (missing constraints or exact resonance)."""


@dataclass(frozen=True)
class MaterialSample:
    """Material realization attached to a mesh.

    ``young`` is either one modulus per element (midpoint rule, shape
    (nelem,)) or one per element and Gauss point (integration-point rule,
    shape (nelem, ngp)).
    """

    young: np.ndarray
    poisson: float
    density: float = 2500.0
    thickness: float = 1.0

    def __post_init__(self):
        young = np.asarray(self.young, dtype=float)
        object.__setattr__(self, "young", young)
        if young.ndim not in (1, 2):
            raise ValueError("young must have shape (nelem,) or (nelem, ngp)")
        if np.any(young <= 0.0):
            raise ValueError("Young's modulus must be positive everywhere")
        if not 0.0 <= self.poisson < 0.5:
            raise ValueError(f"poisson must lie in [0, 0.5), got {self.poisson}")

    @classmethod
    def uniform(cls, mesh: Mesh, young: float, poisson: float,
                density: float = 2500.0, thickness: float = 1.0) -> "MaterialSample":
        return cls(young=np.full(mesh.n_elements, float(young)),
                   poisson=poisson, density=density, thickness=thickness)


@dataclass(frozen=True)
class HarmonicParams:
    """Excitation frequency and hysteretic damping loss factor."""

    frequency: float
    loss_factor: float = 0.02

    def __post_init__(self):
        if self.frequency < 0.0 or self.loss_factor < 0.0:
            raise ValueError("frequency and loss factor must be nonnegative")


@lru_cache(maxsize=32)
def _gp_blocks(order: int, half_w: float, half_h: float, poisson: float,
               thickness: float) -> np.ndarray:
    return reference_gp_stiffness(order, half_w, half_h, poisson, thickness)


def assemble_stiffness(mesh: Mesh, material: MaterialSample) -> sp.csr_matrix:
    """Global stiffness on all dofs (constraints not yet applied)."""
    hx, hy = mesh.element_size
    Kg = _gp_blocks(mesh.level.order, 0.5 * hx, 0.5 * hy,
                    material.poisson, material.thickness)
    young = material.young
    if young.shape[0] != mesh.n_elements:
        raise ValueError(
            f"material has {young.shape[0]} element entries, mesh has {mesh.n_elements}"
        )
    if young.ndim == 1:
        data = np.einsum("e,gij->eij", young, Kg)
    else:
        if young.shape[1] != Kg.shape[0]:
            raise ValueError(
                f"material has {young.shape[1]} Gauss entries per element, "
                f"rule has {Kg.shape[0]}"
            )
        data = np.einsum("eg,gij->eij", young, Kg)
    rows, cols, _ = mesh.assembly_indices()
    K = sp.coo_matrix((data.ravel(), (rows, cols)),
                      shape=(mesh.n_dofs, mesh.n_dofs)).tocsr()
    return K


def assemble_mass(mesh: Mesh, material: MaterialSample) -> sp.csr_matrix:
    """Global consistent mass on all dofs; independent of the modulus."""
    from .elements import element_mass

    Me = element_mass(mesh.reference_corner_coords(), material.density,
                      mesh.level.order, material.thickness)
    rows, cols, _ = mesh.assembly_indices()
    data = np.broadcast_to(Me.ravel(), (mesh.n_elements, Me.size))
    M = sp.coo_matrix((data.ravel(), (rows, cols)),
                      shape=(mesh.n_dofs, mesh.n_dofs)).tocsr()
    return M


def load_vector(mesh: Mesh, total_load: float) -> np.ndarray:
    """Vertical nodal load, split equally over the load column.

    The sum over all entries equals ``total_load`` for every refinement
    level and element order.
    """
    f = np.zeros(mesh.n_dofs)
    nodes = mesh.load_nodes
    f[2 * nodes + 1] = total_load / len(nodes)
    return f


@dataclass
class ConstrainedSystem:
    """Dirichlet-reduced operators of one mesh/material realization."""

    mesh: Mesh
    k_ff: sp.csr_matrix
    f_f: np.ndarray
    m_ff: sp.csr_matrix | None = None

    @property
    def n_free(self) -> int:
        return len(self.mesh.free_dofs)

    def expand(self, u_f: np.ndarray) -> np.ndarray:
        """Embed a free-dof vector into the full dof numbering."""
        u = np.zeros(self.mesh.n_dofs, dtype=u_f.dtype)
        u[self.mesh.free_dofs] = u_f
        return u


def assemble_and_constrain(mesh: Mesh, material: MaterialSample,
                           total_load: float,
                           with_mass: bool = False) -> ConstrainedSystem:
    """Assemble K (and optionally M), apply loads, eliminate fixed dofs."""
    K = assemble_stiffness(mesh, material)
    f = load_vector(mesh, total_load)
    free = mesh.free_dofs
    k_ff = K[free][:, free].tocsc()
    m_ff = None
    if with_mass:
        M = assemble_mass(mesh, material)
        m_ff = M[free][:, free].tocsc()
    return ConstrainedSystem(mesh=mesh, k_ff=k_ff, f_f=f[free], m_ff=m_ff)


def _check_residual(A, x, b, tol: float, label: str) -> None:
    nb = np.linalg.norm(b)
    if nb == 0.0:
        return
    res = np.linalg.norm(A @ x - b) / nb
    if not np.isfinite(res) or res > tol:
        raise SingularSystemError(
            f"{label} solve residual {res:.3e} exceeds {tol:.0e}; "
            "system is singular or severely ill-conditioned"
        )


def solve_static(system: ConstrainedSystem) -> np.ndarray:
    """Direct sparse solve K u = f; returns the full displacement vector."""
    try:
        lu = spla.splu(system.k_ff)
        u_f = lu.solve(system.f_f)
    except RuntimeError as exc:  # singular factorization
        raise SingularSystemError(
            f"static system is singular (missing constraints?): {exc}"
        ) from exc
    _check_residual(system.k_ff, u_f, system.f_f, _STATIC_RESIDUAL_TOL, "static")
    return system.expand(u_f)


def solve_dynamic(system: ConstrainedSystem, hp: HarmonicParams) -> np.ndarray:
    """Harmonic response ``(K (1 + i eta) - (2 pi f)^2 M) u = f``.

    Requires the system to carry a mass matrix.  An exactly singular
    operator (undamped resonance hit exactly) raises with a hint to use a
    positive loss factor.
    """
    if system.m_ff is None:
        raise ValueError("dynamic solve needs a system assembled with_mass=True")
    omega2 = (2.0 * np.pi * hp.frequency) ** 2
    A = (system.k_ff * (1.0 + 1j * hp.loss_factor) - omega2 * system.m_ff).tocsc()
    try:
        lu = spla.splu(A)
        u_f = lu.solve(system.f_f.astype(complex))
    except RuntimeError as exc:
        raise SingularSystemError(
            f"dynamic system is exactly singular at f={hp.frequency} Hz; "
            f"use a positive loss factor eta (got eta={hp.loss_factor}): {exc}"
        ) from exc
    _check_residual(A, u_f, system.f_f.astype(complex), _DYNAMIC_RESIDUAL_TOL, "dynamic")
    return system.expand(u_f)


def min_wavelength(young: float, inertia: float, area: float, density: float,
                   f_max: float) -> float:
    """Smallest bending wavelength from Euler-Bernoulli beam theory.

    ``lambda_min = sqrt(2 pi / f_max) * (E I / (rho A))^(1/4)``; meshes
    should resolve it with at least six elements on the coarsest grid.
    """
    if f_max <= 0.0:
        raise ValueError("f_max must be positive")
    return float(np.sqrt(2.0 * np.pi / f_max) * (young * inertia / (density * area)) ** 0.25)
