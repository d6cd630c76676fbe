"""Tensor-product Lagrange quadrilateral elements for plane stress.

Local node layout is lexicographic on the (xi, eta) reference square:
node (i, j) sits at (xi_i, eta_j) on an equispaced (order+1) x (order+1)
grid and owns local index ``j * (order + 1) + i``.  Degrees of freedom
interleave as (u_x, u_y) per node.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = [
    "MAX_ORDER",
    "element_mass",
    "element_stiffness",
    "gauss_rule_2d",
    "local_nodes",
    "plane_stress_d",
    "shape_functions",
]

MAX_ORDER = 5


def _check_order(order: int) -> None:
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"element order must lie in [1, {MAX_ORDER}], got {order}")


@lru_cache(maxsize=None)
def _lagrange_coeffs(order: int) -> np.ndarray:
    """Monomial coefficients of the 1D Lagrange basis on equispaced nodes.

    Column k holds the coefficients of N_k so that N_k(x) = sum_j C[j, k] x^j.
    """
    nodes = np.linspace(-1.0, 1.0, order + 1)
    V = np.vander(nodes, increasing=True)
    return np.linalg.inv(V)


def _lagrange_1d(order: int, x: np.ndarray):
    """Values and derivatives of the 1D basis at points x, shapes (len(x), order+1)."""
    C = _lagrange_coeffs(order)
    powers = np.vander(np.atleast_1d(x), order + 1, increasing=True)
    vals = powers @ C
    dC = C[1:] * np.arange(1, order + 1)[:, None]
    dvals = powers[:, : order] @ dC
    return vals, dvals


def local_nodes(order: int) -> np.ndarray:
    """Reference coordinates of the element nodes, shape ((order+1)^2, 2)."""
    _check_order(order)
    t = np.linspace(-1.0, 1.0, order + 1)
    XI, ETA = np.meshgrid(t, t, indexing="xy")
    return np.column_stack([XI.ravel(), ETA.ravel()])


def shape_functions(order: int, xi, eta):
    """Shape function values and reference gradients at (xi, eta).

    Returns
    -------
    N : ((order+1)^2,) ndarray
        Basis values; they form a partition of unity.
    dN : (2, (order+1)^2) ndarray
        Rows are d/dxi and d/deta.
    """
    _check_order(order)
    nx, dnx = _lagrange_1d(order, np.array([float(xi)]))
    ny, dny = _lagrange_1d(order, np.array([float(eta)]))
    N = (ny.T @ nx).ravel()
    dN = np.vstack([(ny.T @ dnx).ravel(), (dny.T @ nx).ravel()])
    return N, dN


@lru_cache(maxsize=None)
def _gauss_rule_2d_cached(n: int):
    g, w = np.polynomial.legendre.leggauss(n)
    XI, ETA = np.meshgrid(g, g, indexing="xy")
    WX, WY = np.meshgrid(w, w, indexing="xy")
    return (
        np.column_stack([XI.ravel(), ETA.ravel()]),
        (WX * WY).ravel(),
    )


def gauss_rule_2d(n: int):
    """Tensor Gauss rule with n points per direction on [-1, 1]^2."""
    if n < 1:
        raise ValueError("need at least one Gauss point per direction")
    pts, w = _gauss_rule_2d_cached(n)
    return pts.copy(), w.copy()


def plane_stress_d(young: float, poisson: float) -> np.ndarray:
    """Elastic constitutive matrix for plane stress (engineering shear)."""
    c = young / (1.0 - poisson**2)
    return c * np.array(
        [
            [1.0, poisson, 0.0],
            [poisson, 1.0, 0.0],
            [0.0, 0.0, 0.5 * (1.0 - poisson)],
        ]
    )


def _b_matrix(dN_phys: np.ndarray) -> np.ndarray:
    """Strain-displacement matrix from physical shape gradients (2, nnodes)."""
    n = dN_phys.shape[1]
    B = np.zeros((3, 2 * n))
    B[0, 0::2] = dN_phys[0]
    B[1, 1::2] = dN_phys[1]
    B[2, 0::2] = dN_phys[1]
    B[2, 1::2] = dN_phys[0]
    return B


def _jacobian(coords: np.ndarray, dN: np.ndarray):
    """Jacobian of the isoparametric map and physical gradients."""
    J = dN @ coords  # (2, 2): J[a, b] = d x_b / d xi_a
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    if det <= 0.0:
        raise ValueError(f"non-positive Jacobian determinant {det}")
    Jinv = np.array([[J[1, 1], -J[0, 1]], [-J[1, 0], J[0, 0]]]) / det
    return det, Jinv.T @ dN


def element_stiffness(coords: np.ndarray, d_matrices, order: int,
                      thickness: float = 1.0) -> np.ndarray:
    """Element stiffness by full Gauss quadrature ((order+1)^2 points).

    Parameters
    ----------
    coords : ((order+1)^2, 2) ndarray
        Element node coordinates in local tensor ordering.
    d_matrices : (3, 3) or (ngp, 3, 3) ndarray
        Constitutive matrix, either constant over the element (midpoint
        material rule) or one per Gauss point (integration-point rule).
    order : int
        Polynomial order of the Lagrange basis.
    thickness : float
        Out-of-plane width.
    """
    _check_order(order)
    pts, w = gauss_rule_2d(order + 1)
    d_matrices = np.asarray(d_matrices, dtype=float)
    per_point = d_matrices.ndim == 3
    if per_point and len(d_matrices) != len(pts):
        raise ValueError(
            f"expected {len(pts)} constitutive matrices, got {len(d_matrices)}"
        )
    ndof = 2 * coords.shape[0]
    K = np.zeros((ndof, ndof))
    for g, ((xi, eta), wg) in enumerate(zip(pts, w)):
        _, dN = shape_functions(order, xi, eta)
        det, dN_phys = _jacobian(coords, dN)
        B = _b_matrix(dN_phys)
        D = d_matrices[g] if per_point else d_matrices
        K += (B.T @ D @ B) * (det * wg * thickness)
    return K


def element_mass(coords: np.ndarray, density: float, order: int,
                 thickness: float = 1.0) -> np.ndarray:
    """Consistent element mass matrix ``rho * b * int N^T N``."""
    _check_order(order)
    pts, w = gauss_rule_2d(order + 1)
    nnode = coords.shape[0]
    M_sc = np.zeros((nnode, nnode))  # scalar-field mass, shared by both dofs
    for (xi, eta), wg in zip(pts, w):
        N, dN = shape_functions(order, xi, eta)
        det, _ = _jacobian(coords, dN)
        M_sc += np.outer(N, N) * (det * wg)
    M_sc *= density * thickness
    M = np.zeros((2 * nnode, 2 * nnode))
    M[0::2, 0::2] = M_sc
    M[1::2, 1::2] = M_sc
    return M


def reference_gp_stiffness(order: int, half_w: float, half_h: float,
                           poisson: float, thickness: float = 1.0) -> np.ndarray:
    """Per-Gauss-point unit-Young stiffness blocks for a rectangle.

    On a regular grid every element shares the reference geometry, so the
    element stiffness for any material sample is a weighted sum
    ``K_e = sum_g E[e, g] * Kg[g]``.  Returned shape is
    (ngp, ndof_e, ndof_e).
    """
    _check_order(order)
    pts, w = gauss_rule_2d(order + 1)
    D1 = plane_stress_d(1.0, poisson)
    ndof = 2 * (order + 1) ** 2
    out = np.zeros((len(pts), ndof, ndof))
    det = half_w * half_h
    for g, ((xi, eta), wg) in enumerate(zip(pts, w)):
        _, dN = shape_functions(order, xi, eta)
        dN_phys = np.vstack([dN[0] / half_w, dN[1] / half_h])
        B = _b_matrix(dN_phys)
        out[g] = (B.T @ D1 @ B) * (det * wg * thickness)
    return out


def reference_gp_b_matrices(order: int, half_w: float, half_h: float):
    """B matrices and integration weights at the Gauss points of a rectangle.

    Returns (B, wdet) with B of shape (ngp, 3, ndof_e) and wdet the
    products weight * |J|; used by the elastoplastic assembly/internal
    force loops where the constitutive response varies per point.
    """
    _check_order(order)
    pts, w = gauss_rule_2d(order + 1)
    ndof = 2 * (order + 1) ** 2
    B = np.zeros((len(pts), 3, ndof))
    for g, (xi, eta) in enumerate(pts):
        _, dN = shape_functions(order, xi, eta)
        dN_phys = np.vstack([dN[0] / half_w, dN[1] / half_h])
        B[g] = _b_matrix(dN_phys)
    return B, w * (half_w * half_h)
