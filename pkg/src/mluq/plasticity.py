"""Von Mises plane-stress elastoplasticity with isotropic linear hardening.

The return mapping works natively in the 3-component plane-stress space.
With the yield function in squared form,
``f = 1/2 s^T P s - 1/3 sigma_y(kappa)^2`` and associative flow
``d eps_p = dgamma * P s``, the backward-Euler update

    s(dgamma) = (I + dgamma D P)^{-1} s_trial

diagonalizes in the shared eigenbasis of the elastic matrix D and the
deviatoric projector P ([1,1,0], [1,-1,0], [0,0,1] in Voigt order), which
reduces the corrector to a scalar Newton iteration in the plastic
multiplier.  The consistent tangent follows from linearizing the same
two equations and has the rank-one-update structure
``Xi - (Xi n)(Xi n)^T / (n^T Xi n + beta)`` with
``Xi = (D^{-1} + dgamma P)^{-1}``.

The incremental-iterative solver applies the load schedule step by step,
re-assembling the tangent stiffness from the per-Gauss-point consistent
tangents every outer Newton iteration (full Newton) and balancing
internal against external forces to a residual of ``residual_factor``
times the load increment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fem.assembly import MaterialSample, load_vector
from .fem.elements import plane_stress_d, reference_gp_b_matrices
from .fem.mesh import Mesh

__all__ = [
    "ElastoplasticParams",
    "PlasticState",
    "PlasticCurve",
    "ReturnMapError",
    "StepConvergenceError",
    "return_map",
    "return_map_batch",
    "incremental_solve",
]

# deviatoric projector for plane stress (engineering shear in slot 3)
_P = np.array([
    [2.0 / 3.0, -1.0 / 3.0, 0.0],
    [-1.0 / 3.0, 2.0 / 3.0, 0.0],
    [0.0, 0.0, 2.0],
])

# orthogonal projectors onto the common eigenbasis of D and P
_P1 = 0.5 * np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
_P2 = 0.5 * np.array([[1.0, -1.0, 0.0], [-1.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
_P3 = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]])

_NEWTON_TOL_REL = 1e-10  # on the squared yield residual, relative to sigma_y0^2


class ReturnMapError(RuntimeError):
    """Stress-update Newton failed to converge (sample-level error)."""


class StepConvergenceError(RuntimeError):
    """Outer equilibrium iteration failed for one load step."""

    def __init__(self, step: int, load: float, residuals: list):
        self.step = step
        self.load = load
        self.residuals = residuals
        super().__init__(
            f"load step {step} (cumulative load {load:.6g} N) did not converge; "
            f"residual history {['%.3e' % r for r in residuals]}"
        )


@dataclass(frozen=True)
class ElastoplasticParams:
    """Material and algorithmic parameters of the elastoplastic solve."""

    yield_strength: float = 240e6
    hardening_modulus: float = 2.0e9
    poisson: float = 0.25
    load_max: float = 13.5e3
    load_step: float = 135.0
    residual_factor: float = 1e-4
    max_outer_iterations: int = 30
    max_inner_iterations: int = 50

    def __post_init__(self):
        if self.yield_strength <= 0.0:
            raise ValueError("yield strength must be positive")
        if self.hardening_modulus < 0.0:
            raise ValueError("hardening modulus must be nonnegative")
        if self.load_step <= 0.0 or self.load_max <= 0.0:
            raise ValueError("load schedule must be positive and increasing")

    def load_schedule(self) -> np.ndarray:
        """Cumulative load levels, excluding the initial zero state."""
        n = int(round(self.load_max / self.load_step))
        return np.linspace(self.load_step, n * self.load_step, n)

    @property
    def yield_tolerance(self) -> float:
        return 1e-8 * self.yield_strength


@dataclass
class PlasticState:
    """Single integration point state: stress, hardening memory, flag."""

    stress: np.ndarray = field(default_factory=lambda: np.zeros(3))
    eq_plastic_strain: float = 0.0
    yield_flag: bool = False


def von_mises(stress) -> np.ndarray:
    """Equivalent stress sqrt(sxx^2 - sxx syy + syy^2 + 3 sxy^2)."""
    s = np.asarray(stress, dtype=float)
    return np.sqrt(
        np.maximum(
            s[..., 0] ** 2 - s[..., 0] * s[..., 1] + s[..., 1] ** 2 + 3.0 * s[..., 2] ** 2,
            0.0,
        )
    )


def _xi_matrix(young, poisson, dgamma):
    """Modified elastic tangent (D^-1 + dgamma P)^-1, batched over points."""
    E = np.asarray(young, dtype=float)
    dg = np.asarray(dgamma, dtype=float)
    xi1 = 1.0 / ((1.0 - poisson) / E + dg / 3.0)
    xi2 = 1.0 / ((1.0 + poisson) / E + dg)
    xi3 = 1.0 / (2.0 * (1.0 + poisson) / E + 2.0 * dg)
    return (
        xi1[..., None, None] * _P1
        + xi2[..., None, None] * _P2
        + xi3[..., None, None] * _P3
    )


def return_map_batch(strain_increment, stress_n, kappa_n, young,
                     params: ElastoplasticParams):
    """Vectorized backward-Euler stress update over many Gauss points.

    Parameters
    ----------
    strain_increment : (n, 3) ndarray
        Total strain increments (engineering shear) since the last
        committed state.
    stress_n, kappa_n : (n, 3), (n,) ndarrays
        Committed stress and equivalent plastic strain.
    young : (n,) ndarray
        Per-point Young's modulus.
    params : ElastoplasticParams

    Returns
    -------
    stress : (n, 3) ndarray
    d_ep : (n, 3, 3) ndarray
        Consistent tangents (elastic matrix on elastic points).
    kappa : (n,) ndarray
    plastic : (n,) bool ndarray
    """
    deps = np.atleast_2d(np.asarray(strain_increment, dtype=float))
    sig_n = np.atleast_2d(np.asarray(stress_n, dtype=float))
    kap_n = np.atleast_1d(np.asarray(kappa_n, dtype=float))
    E = np.atleast_1d(np.asarray(young, dtype=float))
    nu, sy0, H = params.poisson, params.yield_strength, params.hardening_modulus

    # trial elastic state
    c = E / (1.0 - nu**2)
    s_tr = np.empty_like(sig_n)
    s_tr[:, 0] = sig_n[:, 0] + c * (deps[:, 0] + nu * deps[:, 1])
    s_tr[:, 1] = sig_n[:, 1] + c * (nu * deps[:, 0] + deps[:, 1])
    s_tr[:, 2] = sig_n[:, 2] + c * 0.5 * (1.0 - nu) * deps[:, 2]

    sy_n = sy0 + H * kap_n
    f_tr = von_mises(s_tr) - sy_n
    plastic = f_tr > 0.0

    stress = s_tr.copy()
    kappa = kap_n.copy()
    d_ep = plane_stress_d(1.0, nu)[None, :, :] * E[:, None, None]

    if np.any(plastic):
        idx = np.where(plastic)[0]
        s_p, dg = _solve_multiplier(s_tr[idx], kap_n[idx], E[idx], nu, sy0, H,
                                    params.max_inner_iterations)
        stress[idx] = s_p
        phi = np.sqrt(2.0 / 3.0 * np.einsum("ni,ij,nj->n", s_p, _P, s_p))
        kappa[idx] = kap_n[idx] + dg * phi
        d_ep[idx] = _consistent_tangent(s_p, dg, kappa[idx], E[idx], nu, sy0, H)

    return stress, d_ep, kappa, plastic


def _solve_multiplier(s_tr, kap_n, E, nu, sy0, H, max_iter: int = 50):
    """Scalar Newton for the plastic multiplier, batched; returns (stress, dgamma)."""
    u_tr = s_tr[:, 0] + s_tr[:, 1]
    v_tr = s_tr[:, 0] - s_tr[:, 1]
    w_tr = s_tr[:, 2]
    c1 = E / (3.0 * (1.0 - nu))
    c2 = E / (1.0 + nu)
    A = u_tr**2 / 6.0
    Bc = 0.5 * v_tr**2 + 2.0 * w_tr**2

    dg = np.zeros_like(u_tr)
    tol = _NEWTON_TOL_REL * sy0**2
    converged = np.zeros(dg.shape, dtype=bool)
    for _ in range(max_iter):
        a1 = 1.0 + c1 * dg
        a2 = 1.0 + c2 * dg
        psi = A / a1**2 + Bc / a2**2
        dpsi = -2.0 * c1 * A / a1**3 - 2.0 * c2 * Bc / a2**3
        phi = np.sqrt(2.0 * psi / 3.0)
        dphi = dpsi / (3.0 * phi)
        sy = sy0 + H * (kap_n + dg * phi)
        R = 0.5 * psi - sy**2 / 3.0
        converged = np.abs(R) <= tol
        if np.all(converged):
            break
        dR = 0.5 * dpsi - (2.0 / 3.0) * sy * H * (phi + dg * dphi)
        step = np.where(converged, 0.0, R / dR)
        dg_new = dg - step
        # the residual is monotone decreasing from R(0) > 0; keep dg >= 0
        dg = np.maximum(dg_new, 0.0)
    else:
        raise ReturnMapError(
            f"stress update did not converge for {int(np.sum(~converged))} point(s); "
            f"max |R|/sy0^2 = {float(np.max(np.abs(R))) / sy0**2:.3e}"
        )

    a1 = 1.0 + c1 * dg
    a2 = 1.0 + c2 * dg
    u = u_tr / a1
    v = v_tr / a2
    w = w_tr / a2
    stress = np.column_stack([0.5 * (u + v), 0.5 * (u - v), w])
    return stress, dg


def _consistent_tangent(stress, dg, kappa, E, nu, sy0, H):
    """Algorithmic tangent for the converged plastic points."""
    Xi = _xi_matrix(E, nu, dg)
    n = stress @ _P.T  # flow direction P s
    Xn = np.einsum("nij,nj->ni", Xi, n)
    nXn = np.einsum("ni,ni->n", n, Xn)
    sy = sy0 + H * kappa
    phi = (2.0 / 3.0) * sy  # sqrt(2/3 s^T P s) at a converged state
    k1 = 1.0 - (4.0 * sy * H * dg) / (9.0 * phi)
    beta = (2.0 / 3.0) * sy * H * phi / k1
    return Xi - np.einsum("ni,nj->nij", Xn, Xn) / (nXn + beta)[:, None, None]


def return_map(strain_increment, state: PlasticState, params: ElastoplasticParams,
               young: float):
    """Single-point stress update; see :func:`return_map_batch`.

    Returns (stress, consistent tangent, new state) without mutating the
    input state.
    """
    stress, d_ep, kappa, plastic = return_map_batch(
        np.asarray(strain_increment, dtype=float)[None, :],
        state.stress[None, :],
        np.array([state.eq_plastic_strain]),
        np.array([float(young)]),
        params,
    )
    new_state = PlasticState(
        stress=stress[0].copy(),
        eq_plastic_strain=float(kappa[0]),
        yield_flag=bool(plastic[0]),
    )
    return stress[0], d_ep[0], new_state


@dataclass
class PlasticCurve:
    """Result of an incremental elastoplastic solve."""

    curve: np.ndarray  # (n_steps + 1, 2): cumulative load, QoI deflection
    displacement: np.ndarray  # final full displacement vector
    stress: np.ndarray  # (nelem, ngp, 3) committed stresses
    eq_plastic_strain: np.ndarray  # (nelem, ngp)
    yielded: np.ndarray  # (nelem, ngp) bool

    @property
    def final_deflection(self) -> float:
        return float(self.curve[-1, 1])


def incremental_solve(mesh: Mesh, material: MaterialSample,
                      params: ElastoplasticParams,
                      qoi_node: int | None = None) -> PlasticCurve:
    """Incremental-iterative (Newton-Raphson) elastoplastic load stepping.

    Young's modulus is taken per element (midpoint rule) or per Gauss
    point (integration-point rule) from the material sample; the tangent
    stiffness is reassembled from the consistent tangents every outer
    iteration.  Every converged step satisfies
    ``||r|| <= residual_factor * ||delta f||`` on the free dofs.
    """
    order = mesh.level.order
    ngp = (order + 1) ** 2
    nelem = mesh.n_elements
    hx, hy = mesh.element_size
    Bmat, wdet = reference_gp_b_matrices(order, 0.5 * hx, 0.5 * hy)
    wdet = wdet * material.thickness
    rows, cols, dofs = mesh.assembly_indices()
    free = mesh.free_dofs
    if qoi_node is None:
        qoi_node = mesh.mid_top_node
    qoi_dof = 2 * qoi_node + 1

    young = material.young
    if young.ndim == 1:
        young_gp = np.repeat(young[:, None], ngp, axis=1)
    else:
        if young.shape[1] != ngp:
            raise ValueError(f"expected {ngp} Gauss entries per element")
        young_gp = young
    young_flat = young_gp.reshape(-1)

    stress_c = np.zeros((nelem * ngp, 3))  # committed state
    kappa_c = np.zeros(nelem * ngp)
    yielded = np.zeros(nelem * ngp, dtype=bool)

    u = np.zeros(mesh.n_dofs)
    f_unit = load_vector(mesh, 1.0)
    schedule = params.load_schedule()
    curve = np.zeros((len(schedule) + 1, 2))

    f_prev = np.zeros(mesh.n_dofs)
    for step, load in enumerate(schedule, start=1):
        f_ext = f_unit * load
        delta_f = f_ext - f_prev
        tol_ref = np.linalg.norm(delta_f[free])
        if tol_ref == 0.0:
            tol_ref = np.linalg.norm(f_ext[free])
        tol = params.residual_factor * tol_ref

        du = np.zeros(mesh.n_dofs)
        residuals = []
        for _ in range(params.max_outer_iterations):
            du_e = du[dofs]  # (nelem, ndofe)
            deps = np.einsum("gki,ei->egk", Bmat, du_e).reshape(-1, 3)
            stress, d_ep, kappa, plastic = return_map_batch(
                deps, stress_c, kappa_c, young_flat, params
            )
            # internal force and residual
            sig_e = stress.reshape(nelem, ngp, 3)
            q_e = np.einsum("g,gki,egk->ei", wdet, Bmat, sig_e)
            q = np.zeros(mesh.n_dofs)
            np.add.at(q, dofs.ravel(), q_e.ravel())
            r = f_ext - q
            res = np.linalg.norm(r[free])
            residuals.append(res)
            if res <= tol:
                break
            # tangent assembly from the consistent moduli
            dep_e = d_ep.reshape(nelem, ngp, 3, 3)
            data = np.einsum("g,gki,egkl,glj->eij", wdet, Bmat, dep_e, Bmat)
            K = sp.coo_matrix((data.ravel(), (rows, cols)),
                              shape=(mesh.n_dofs, mesh.n_dofs)).tocsc()
            k_ff = K[free][:, free]
            du_f = spla.splu(k_ff).solve(r[free])
            du[free] += du_f
        else:
            raise StepConvergenceError(step, float(load), residuals)

        # commit
        stress_c, kappa_c = stress, kappa
        yielded |= plastic
        u = u + du
        f_prev = f_ext
        curve[step] = (load, u[qoi_dof])

    return PlasticCurve(
        curve=curve,
        displacement=u,
        stress=stress_c.reshape(nelem, ngp, 3),
        eq_plastic_strain=kappa_c.reshape(nelem, ngp),
        yielded=yielded.reshape(nelem, ngp),
    )
