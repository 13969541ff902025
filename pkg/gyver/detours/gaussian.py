"""Closed-form Gromov-Wasserstein maps and plans between Gaussian measures.

Eigen-decompositions sort eigenvalues in decreasing order and orient each
eigenvector so that its largest-magnitude entry is positive. Covariances with
an eigenvalue below 1e-12 are rejected rather than regularized.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike

from gyver.detours import exc
from gyver.detours.measures import (
    GaussianMeasure,
    Subspace,
    make_gaussian,
    orient_columns,
)

logger = logging.getLogger(__name__)

EIGEN_FLOOR = 1e-12
CENTER_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class AffineMap:
    linear: np.ndarray
    offset: np.ndarray

    def __call__(self, points: ArrayLike) -> np.ndarray:
        """Map row-stacked samples."""
        points = np.asarray(points, dtype=float)
        return points @ self.linear.T + self.offset

    def pushforward_residual(self, source: np.ndarray, target: np.ndarray) -> float:
        """Frobenius norm of `linear·source·linearᵀ - target`."""
        return float(np.linalg.norm(self.linear @ source @ self.linear.T - target))


@dataclass(frozen=True, eq=False)
class BlockPartition:
    """A covariance written in the frame `[V_E | V_E⊥]`."""

    sigma_e: np.ndarray
    sigma_e_ep: np.ndarray
    sigma_ep_e: np.ndarray
    sigma_ep: np.ndarray

    @property
    def k(self) -> int:
        return self.sigma_e.shape[0]

    def assembled(self) -> np.ndarray:
        return np.block([[self.sigma_e, self.sigma_e_ep], [self.sigma_ep_e, self.sigma_ep]])


def partition_covariance(covariance: ArrayLike, subspace: Subspace) -> BlockPartition:
    covariance = np.asarray(covariance, dtype=float)
    if covariance.shape != (subspace.ambient_dim, subspace.ambient_dim):
        raise exc.sentence(
            exc.DimensionMismatch,
            f'covariance of shape {covariance.shape} for a subspace of R^{subspace.ambient_dim}',
        )
    frame = subspace.frame()
    local = frame.T @ covariance @ frame
    local = (local + local.T) / 2
    k = subspace.dim
    return BlockPartition(local[:k, :k], local[:k, k:], local[k:, :k], local[k:, k:])


def _check_invertible(block: np.ndarray, what: str) -> None:
    if block.size and np.linalg.eigvalsh(block)[0] <= EIGEN_FLOOR:
        raise exc.sentence(exc.SingularBlock, f'{what} is not positive definite')


def _solve(a: np.ndarray, b: np.ndarray, assume_a: str = 'gen') -> np.ndarray:
    if b.size == 0:
        return np.zeros(b.shape)
    return scipy.linalg.solve(a, b, assume_a=assume_a)


def _solve_pos(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _solve(a, b, 'pos')


def schur_complement(part: BlockPartition) -> np.ndarray:
    """`Σ_E⊥ - Σ_EE⊥ᵀ Σ_E⁻¹ Σ_EE⊥`."""
    _check_invertible(part.sigma_e, 'the subspace block')
    correction = part.sigma_e_ep.T @ _solve_pos(part.sigma_e, part.sigma_e_ep)
    complement = part.sigma_ep - correction
    return (complement + complement.T) / 2


def _sorted_eigen(covariance: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    order = np.argsort(-eigenvalues, kind='stable')
    eigenvalues = eigenvalues[order]
    if eigenvalues.size and eigenvalues[-1] < EIGEN_FLOOR:
        raise exc.sentence(
            exc.DegenerateCovariance,
            f'{what} has eigenvalue {eigenvalues[-1]:.3e} below {EIGEN_FLOOR}',
        )
    return eigenvalues, orient_columns(eigenvectors[:, order])


def _ggw_linear(
    sigma: np.ndarray, lam: np.ndarray, signs: ArrayLike | None = None
) -> np.ndarray:
    p, q = sigma.shape[0], lam.shape[0]
    if p < q:
        raise exc.sentence(
            exc.DimensionMismatch, f'the source dimension {p} must not be below the target {q}'
        )
    signs = np.ones(q) if signs is None else np.asarray(signs, dtype=float).reshape(-1)
    if signs.shape[0] != q or not np.all(np.abs(signs) == 1.0):
        raise exc.sentence(exc.DimensionMismatch, f'signs must be {q} entries of ±1')
    if q == 0:
        return np.zeros((0, p))
    d_mu, p_mu = _sorted_eigen(sigma, 'the source covariance')
    d_nu, p_nu = _sorted_eigen(lam, 'the target covariance')
    a = np.zeros((q, p))
    a[:, :q] = np.diag(signs * np.sqrt(d_nu) / np.sqrt(d_mu[:q]))
    return p_nu @ a @ p_mu.T


def ggw_map(
    mu: GaussianMeasure, nu: GaussianMeasure, signs: ArrayLike | None = None
) -> AffineMap:
    """Gaussian Gromov-Wasserstein map `x ↦ m_ν + P_ν A P_μᵀ (x - m_μ)`."""
    linear = _ggw_linear(mu.covariance, nu.covariance, signs)
    return AffineMap(linear, nu.mean - linear @ mu.mean)


@dataclass(frozen=True, eq=False)
class MongeKnotheMap:
    """Block lower-triangular map; `local` acts in the frames `[V_E|V_E⊥] → [V_F|V_F⊥]`."""

    t_ef: np.ndarray
    c: np.ndarray
    t_perp: np.ndarray
    local: np.ndarray
    affine: AffineMap

    def __call__(self, points: ArrayLike) -> np.ndarray:
        return self.affine(points)


def _check_subspaces(
    mu: GaussianMeasure, nu: GaussianMeasure, e_subspace: Subspace, f_subspace: Subspace
) -> None:
    if e_subspace.ambient_dim != mu.dim or f_subspace.ambient_dim != nu.dim:
        raise exc.sentence(
            exc.DimensionMismatch,
            f'subspaces of R^{e_subspace.ambient_dim} and R^{f_subspace.ambient_dim} for '
            f'Gaussians of dimensions {mu.dim} and {nu.dim}',
        )
    if mu.dim < nu.dim:
        raise exc.sentence(
            exc.DimensionMismatch,
            f'the source dimension {mu.dim} must not be below the target {nu.dim}',
        )


def mk_gaussian_map(
    mu: GaussianMeasure,
    nu: GaussianMeasure,
    e_subspace: Subspace,
    f_subspace: Subspace,
    signs: ArrayLike | None = None,
    perp_signs: ArrayLike | None = None,
) -> MongeKnotheMap:
    _check_subspaces(mu, nu, e_subspace, f_subspace)
    if e_subspace.dim != f_subspace.dim:
        raise exc.sentence(
            exc.DimensionMismatch,
            f'monge-knothe needs subspaces of equal dimension, got {e_subspace.dim} '
            f'and {f_subspace.dim}',
        )
    source = partition_covariance(mu.covariance, e_subspace)
    target = partition_covariance(nu.covariance, f_subspace)
    _check_invertible(target.sigma_e, 'the target subspace block')
    t_ef = _ggw_linear(source.sigma_e, target.sigma_e, signs)
    t_perp = _ggw_linear(schur_complement(source), schur_complement(target), perp_signs)
    # C = (Λ_F⊥F T⁻ᵀ - T_⊥ Σ_E⊥E) Σ_E⁻¹
    shifted = _solve(t_ef, target.sigma_e_ep).T - t_perp @ source.sigma_ep_e
    c = _solve_pos(source.sigma_e, shifted.T).T

    k, p, q = e_subspace.dim, mu.dim, nu.dim
    local = np.zeros((q, p))
    local[:k, :k] = t_ef
    local[k:, :k] = c
    local[k:, k:] = t_perp
    linear = f_subspace.frame() @ local @ e_subspace.frame().T
    affine = AffineMap(linear, nu.mean - linear @ mu.mean)
    logger.debug(
        'mk_gaussian_map residual %.3e', affine.pushforward_residual(mu.covariance, nu.covariance)
    )
    return MongeKnotheMap(t_ef, c, t_perp, local, affine)


def mi_gaussian_plan(
    mu: GaussianMeasure,
    nu: GaussianMeasure,
    e_subspace: Subspace,
    f_subspace: Subspace,
    t_ef: ArrayLike | None = None,
) -> GaussianMeasure:
    """Joint Gaussian of the Monge-Independent plan between centered Gaussians.

    `t_ef` defaults to the Gaussian GW map between the subspace blocks.
    """
    if np.max(np.abs(mu.mean)) > CENTER_TOL or np.max(np.abs(nu.mean)) > CENTER_TOL:
        raise exc.sentence(exc.NotCentered, 'monge-independent needs centered Gaussians')
    _check_subspaces(mu, nu, e_subspace, f_subspace)
    k, k_prime = e_subspace.dim, f_subspace.dim
    if k < k_prime:
        raise exc.sentence(
            exc.DimensionMismatch, f'the source subspace dimension {k} is below {k_prime}'
        )
    source = partition_covariance(mu.covariance, e_subspace)
    target = partition_covariance(nu.covariance, f_subspace)
    _check_invertible(target.sigma_e, 'the target subspace block')
    if t_ef is None:
        transfer = _ggw_linear(source.sigma_e, target.sigma_e)
    else:
        transfer = np.asarray(t_ef, dtype=float).reshape(k_prime, k)

    v_e, v_ep = e_subspace.basis, e_subspace.complement_basis
    v_f, v_fp = f_subspace.basis, f_subspace.complement_basis
    left = v_e @ source.sigma_e + v_ep @ source.sigma_ep_e
    right = v_f.T + _solve_pos(target.sigma_e, target.sigma_ep_e.T) @ v_fp.T
    cross = left @ transfer.T @ right

    p, q = mu.dim, nu.dim
    gamma = np.empty((p + q, p + q))
    gamma[:p, :p] = mu.covariance
    gamma[p:, p:] = nu.covariance
    gamma[:p, p:] = cross
    gamma[p:, :p] = cross.T
    return make_gaussian(np.zeros(p + q), gamma)
