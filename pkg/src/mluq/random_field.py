"""Truncated Karhunen-Loeve representation of a Gaussian random field.

The field lives on an axis-aligned rectangle and has the exponential
covariance ``C(x, y) = sigma^2 exp(-||x - y||_p / lambda)`` with p in
{1, 2}.  Its spectral decomposition is approximated by Nystrom
collocation on a tensor Gauss-Legendre rule: the weighted kernel matrix
``Psi = sqrt(W) Sigma sqrt(W)`` is symmetric positive semi-definite, its
eigenpairs are sorted descending, and eigenfunctions are recovered
anywhere in the domain through the Nystrom interpolation formula.

Gamma-field realizations are obtained by mapping the Gaussian values
pointwise through the memoryless transform from :mod:`mluq.distributions`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .distributions import GammaParams, memoryless_transform

__all__ = [
    "CovarianceSpec",
    "KLBasis",
    "FieldRealization",
    "EigensolveError",
    "covariance",
    "gauss_legendre_rule",
    "nystrom_eigensolve",
    "truncate_to_variance",
    "evaluate_gaussian",
    "evaluate_gamma",
    "dump_spectrum",
]

# eigenvalues below this times the leading eigenvalue are discarded
_EIG_DISCARD_REL = 1e-12


class EigensolveError(RuntimeError):
    """Raised when the Nystrom eigenvalue problem cannot be solved.

    Carries the number of collocation points and basic conditioning
    diagnostics of the weighted kernel matrix.
    """

    def __init__(self, n_points: int, diagnostics: str):
        self.n_points = n_points
        self.diagnostics = diagnostics
        super().__init__(f"Nystrom eigensolve failed with M={n_points} points: {diagnostics}")


@dataclass(frozen=True)
class CovarianceSpec:
    """Exponential covariance kernel on a rectangle.

    Parameters
    ----------
    sigma : float
        Pointwise standard deviation of the Gaussian field (dimensionless
        before the marginal transform).
    corr_length : float
        Correlation length lambda in meters.
    norm_exponent : int
        p of the p-norm measuring point distance, 1 or 2.
    length, height : float
        Rectangle extent in meters, origin at (0, 0).
    """

    sigma: float = 1.0
    corr_length: float = 0.3
    norm_exponent: int = 2
    length: float = 2.5
    height: float = 0.25

    def __post_init__(self):
        if self.sigma <= 0.0 or self.corr_length <= 0.0:
            raise ValueError("sigma and corr_length must be positive")
        if self.norm_exponent not in (1, 2):
            raise ValueError("norm_exponent must be 1 or 2")
        if self.length <= 0.0 or self.height <= 0.0:
            raise ValueError("domain extents must be positive")

    @property
    def area(self) -> float:
        return self.length * self.height


def covariance(spec: CovarianceSpec, x, y):
    """Kernel value(s) ``sigma^2 exp(-||x - y||_p / lambda)``.

    ``x`` and ``y`` may be single points of shape (2,) or arrays of
    points of shape (n, 2); broadcasting follows numpy rules on the
    leading axes.
    """
    xa = np.atleast_2d(np.asarray(x, dtype=float))
    ya = np.atleast_2d(np.asarray(y, dtype=float))
    d = xa - ya
    if spec.norm_exponent == 2:
        dist = np.sqrt(np.sum(d * d, axis=-1))
    else:
        dist = np.sum(np.abs(d), axis=-1)
    out = spec.sigma**2 * np.exp(-dist / spec.corr_length)
    if np.ndim(x) == 1 and np.ndim(y) == 1:
        return float(out[0])
    return out


def gauss_legendre_rule(spec: CovarianceSpec, nx: int = 64, ny: int = 16):
    """Tensor Gauss-Legendre quadrature on the rectangle.

    Returns (points, weights) with points of shape (nx*ny, 2); the
    weights sum to the domain area exactly.
    """
    if nx < 2 or ny < 2:
        raise ValueError("need at least 2 quadrature points per direction")
    gx, wx = np.polynomial.legendre.leggauss(nx)
    gy, wy = np.polynomial.legendre.leggauss(ny)
    px = 0.5 * spec.length * (gx + 1.0)
    py = 0.5 * spec.height * (gy + 1.0)
    pwx = 0.5 * spec.length * wx
    pwy = 0.5 * spec.height * wy
    X, Y = np.meshgrid(px, py, indexing="ij")
    WX, WY = np.meshgrid(pwx, pwy, indexing="ij")
    points = np.column_stack([X.ravel(), Y.ravel()])
    weights = (WX * WY).ravel()
    return points, weights


@dataclass(frozen=True)
class KLBasis:
    """Discrete KL eigenstructure from a Nystrom collocation solve.

    Attributes
    ----------
    spec : CovarianceSpec
        Kernel the basis was computed for.
    nodes : (M, 2) ndarray
        Quadrature points.
    weights : (M,) ndarray
        Positive quadrature weights.
    eigenvalues : (m,) ndarray
        Retained operator eigenvalues, sorted descending.
    eigenvectors : (m, M) ndarray
        Rows are the weighted eigenvectors ``B*_n`` of
        ``Psi = sqrt(W) Sigma sqrt(W)``; orthonormal in the Euclidean
        inner product, which makes the interpolated eigenfunctions
        orthonormal under the quadrature rule.
    truncation : int
        Number of modes a realization uses (defaults to all retained).
    """

    spec: CovarianceSpec
    nodes: np.ndarray
    weights: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    truncation: int = field(default=0)

    def __post_init__(self):
        if self.truncation == 0:
            object.__setattr__(self, "truncation", len(self.eigenvalues))
        if not 1 <= self.truncation <= len(self.eigenvalues):
            raise ValueError("truncation must lie in [1, number of retained modes]")

    @property
    def n_modes(self) -> int:
        return len(self.eigenvalues)

    def truncated(self, s: int) -> "KLBasis":
        """Copy of the basis restricted to the `s` leading modes."""
        if not 1 <= s <= self.n_modes:
            raise ValueError(f"s must lie in [1, {self.n_modes}]")
        return KLBasis(
            spec=self.spec,
            nodes=self.nodes,
            weights=self.weights,
            eigenvalues=self.eigenvalues[:s],
            eigenvectors=self.eigenvectors[:s],
            truncation=s,
        )

    def eigenfunction_matrix(self, points) -> np.ndarray:
        """Nystrom interpolant values b_n(x), shape (n_points, truncation).

        ``b_n(x) = (1/theta_n) sum_q sqrt(w_q) B*_{n,q} C(x, y_q)``; at the
        quadrature nodes the interpolant reproduces ``B*_{n,q}/sqrt(w_q)``.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        s = self.truncation
        C = covariance(self.spec, pts[:, None, :], self.nodes[None, :, :])
        coef = (self.eigenvectors[:s] * np.sqrt(self.weights)).T / self.eigenvalues[:s]
        return C @ coef

    def pointwise_variance(self, points) -> np.ndarray:
        """Truncated field variance sum_n theta_n b_n(x)^2 at each point."""
        B = self.eigenfunction_matrix(points)
        return (B * B) @ self.eigenvalues[: self.truncation]


def nystrom_eigensolve(spec: CovarianceSpec, nx: int = 64, ny: int = 16) -> KLBasis:
    """Solve the collocated covariance eigenproblem on a tensor GL rule.

    The symmetric form ``Psi B* = theta B*`` with
    ``Psi = sqrt(W) Sigma sqrt(W)`` guarantees real nonnegative
    eigenvalues and orthogonal eigenvectors.  Eigenpairs are returned in
    descending order; each eigenvector's sign is fixed so its
    largest-magnitude entry is positive, making realizations reproducible
    across eigensolver backends.
    """
    points, weights = gauss_legendre_rule(spec, nx, ny)
    if np.any(weights <= 0.0):
        raise ValueError("quadrature weights must be positive")
    M = len(points)
    Sigma = covariance(spec, points[:, None, :], points[None, :, :])
    sw = np.sqrt(weights)
    Psi = Sigma * sw[:, None] * sw[None, :]
    Psi = 0.5 * (Psi + Psi.T)  # symmetric by construction; enforce exactly
    try:
        theta, vecs = np.linalg.eigh(Psi)
    except np.linalg.LinAlgError as exc:
        diag = f"{exc}; trace={np.trace(Psi):.3e}, max|Psi|={np.abs(Psi).max():.3e}"
        raise EigensolveError(M, diag) from exc

    order = np.argsort(theta)[::-1]
    theta = theta[order]
    vecs = vecs[:, order].T  # rows are eigenvectors

    keep = theta >= _EIG_DISCARD_REL * theta[0]
    theta = theta[keep]
    vecs = vecs[keep]

    # sign convention: largest-magnitude entry positive
    idx = np.argmax(np.abs(vecs), axis=1)
    signs = np.sign(vecs[np.arange(len(vecs)), idx])
    vecs = vecs * signs[:, None]

    return KLBasis(spec=spec, nodes=points, weights=weights,
                   eigenvalues=theta, eigenvectors=vecs)


def truncate_to_variance(basis: KLBasis, fraction: float) -> int:
    """Smallest s whose leading eigenvalues carry `fraction` of the variance.

    The reference variance is the trace of the covariance operator,
    ``sigma^2 * area``, which the full discrete spectrum reproduces
    exactly.  Raises ValueError listing the attainable maximum when the
    basis holds too few modes (e.g. after an explicit truncation).
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    total = basis.spec.sigma**2 * basis.spec.area
    cum = np.cumsum(basis.eigenvalues[: basis.truncation])
    attainable = cum[-1] / total
    if fraction > attainable + 1e-9:
        raise ValueError(
            f"fraction {fraction} unattainable with {basis.truncation} modes; "
            f"attainable maximum is {attainable:.9f}"
        )
    frac = cum / total
    s = int(np.searchsorted(frac, fraction - 1e-12) + 1)
    return min(s, len(cum))


@dataclass(frozen=True)
class FieldRealization:
    """One sample of the Gaussian field: KL coefficients plus basis.

    The coefficient vector is drawn once per sample and shared across all
    meshes/levels of that sample, which is what keeps coupled level
    differences small.
    """

    xi: np.ndarray
    basis: KLBasis
    mean_offset: float = 0.0

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        object.__setattr__(self, "xi", xi)
        if xi.shape != (self.basis.truncation,):
            raise ValueError(
                f"xi must have length {self.basis.truncation}, got {xi.shape}"
            )


def evaluate_gaussian(realization: FieldRealization, points) -> np.ndarray:
    """Gaussian field values ``Z(x) = mean + sum_n sqrt(theta_n) xi_n b_n(x)``."""
    basis = realization.basis
    B = basis.eigenfunction_matrix(points)
    amp = np.sqrt(basis.eigenvalues[: basis.truncation]) * realization.xi
    return realization.mean_offset + B @ amp


def evaluate_gamma(realization: FieldRealization, points, marginal: GammaParams) -> np.ndarray:
    """Gamma field values: memoryless transform of the Gaussian field."""
    return memoryless_transform(evaluate_gaussian(realization, points), marginal)


def dump_spectrum(basis: KLBasis, path) -> None:
    """Write (mode, eigenvalue, cumulative fraction) rows as CSV."""
    cum = np.cumsum(basis.eigenvalues)
    frac = cum / cum[-1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mode", "eigenvalue", "cumulative_fraction"])
        for n, (theta, fr) in enumerate(zip(basis.eigenvalues, frac), start=1):
            writer.writerow([n, f"{theta:.16e}", f"{fr:.16e}"])
