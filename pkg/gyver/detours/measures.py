"""Core data types shared by every solver.

All types are immutable after construction: the arrays they hold are private,
read-only copies, so instances can be shared between concurrent solves.
"""

import csv
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import TypeAlias

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike
from scipy import sparse

from gyver.detours import exc
from gyver.detours.functions import lazymethod

WEIGHT_SUM_TOL = 1e-6
MARGINAL_TOL = 1e-9
ORTHONORMAL_TOL = 1e-10
ZERO_MASS = 1e-15

Matrix: TypeAlias = np.ndarray | sparse.sparray


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float, copy=True)
    array.setflags(write=False)
    return array


def orient_columns(vectors: np.ndarray) -> np.ndarray:
    """Flip column signs so the largest-magnitude entry of each column is positive."""
    vectors = np.array(vectors, dtype=float, copy=True)
    if vectors.size == 0:
        return vectors
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Weighted point cloud: `points` is n×d, `weights` sums to one."""

    points: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.size

    def with_points(self, points: ArrayLike) -> 'DiscreteMeasure':
        """Same weights on a new support of the same size."""
        return make_discrete_measure(points, self.weights)


def make_discrete_measure(
    points: ArrayLike, weights: ArrayLike | None = None
) -> DiscreteMeasure:
    """Validate a point cloud; `weights` defaults to uniform.

    Weights within 1e-6 of summing to one are renormalized, anything further
    off is rejected.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    if points.ndim != 2:
        raise exc.sentence(
            exc.DimensionMismatch, f'points must be a matrix, got {points.ndim} dimensions'
        )
    n = points.shape[0]
    if n == 0:
        raise exc.sentence(exc.EmptySupport, 'a measure needs at least one support point')
    if weights is None:
        weights = np.full(n, 1.0 / n)
    weights = np.asarray(weights, dtype=float).reshape(-1)
    if weights.shape[0] != n:
        raise exc.sentence(
            exc.DimensionMismatch, f'{n} points but {weights.shape[0]} weights'
        )
    if not (np.all(np.isfinite(points)) and np.all(np.isfinite(weights))):
        raise exc.sentence(exc.NonFiniteValue, 'points and weights must be finite')
    if np.any(weights < 0):
        raise exc.sentence(
            exc.NegativeWeight, f'weights must be non-negative, minimum is {weights.min()}'
        )
    total = weights.sum()
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise exc.sentence(
            exc.WeightSumOutOfTolerance, f'weights sum to {total}, expected 1'
        )
    return DiscreteMeasure(_frozen(points), _frozen(weights / total))


def uniform_weights(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


@dataclass(frozen=True, eq=False)
class Coupling:
    """Transport plan with prescribed marginals.

    `matrix` is either a dense array or a scipy sparse array; monotone 1D
    couplings are kept sparse.
    """

    matrix: Matrix
    row_marginal: np.ndarray
    col_marginal: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape  # type: ignore[return-value]

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.matrix)

    @lazymethod
    def dense(self) -> np.ndarray:
        if self.is_sparse:
            return _frozen(self.matrix.toarray())  # type: ignore[union-attr]
        return self.matrix  # type: ignore[return-value]

    def support(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Row indices, column indices and masses of the nonzero entries, row-major."""
        if self.is_sparse:
            coo = sparse.coo_array(self.matrix)
            order = np.lexsort((coo.col, coo.row))
            rows, cols, masses = coo.row[order], coo.col[order], coo.data[order]
        else:
            rows, cols = np.nonzero(self.matrix)
            masses = self.matrix[rows, cols]
        keep = masses > 0
        return rows[keep].astype(int), cols[keep].astype(int), masses[keep]

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1), dtype=float).reshape(-1)

    def col_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=0), dtype=float).reshape(-1)

    def marginal_residual(self) -> float:
        return float(
            max(
                np.max(np.abs(self.row_sums() - self.row_marginal)),
                np.max(np.abs(self.col_sums() - self.col_marginal)),
            )
        )

    def cost(self, cost_matrix: np.ndarray) -> float:
        """Linear transport cost <C, γ>."""
        if self.is_sparse:
            rows, cols, masses = self.support()
            return float(np.dot(cost_matrix[rows, cols], masses))
        return float(np.sum(cost_matrix * self.matrix))

    @classmethod
    def product(cls, p: ArrayLike, q: ArrayLike) -> 'Coupling':
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        return make_coupling(np.outer(p, q), p, q)


def make_coupling(
    matrix: Matrix | ArrayLike,
    row_marginal: ArrayLike | None = None,
    col_marginal: ArrayLike | None = None,
    *,
    atol: float = MARGINAL_TOL,
) -> Coupling:
    """Validate a plan; marginals default to its own row and column sums."""
    if sparse.issparse(matrix):
        matrix = sparse.csr_array(matrix, dtype=float)
        values = matrix.data
    else:
        matrix = np.asarray(matrix, dtype=float)
        values = matrix
    if matrix.ndim != 2:
        raise exc.sentence(exc.DimensionMismatch, 'a coupling must be a matrix')
    if values.size and not np.all(np.isfinite(values)):
        raise exc.sentence(exc.NonFiniteValue, 'coupling entries must be finite')
    if values.size and values.min() < 0:
        raise exc.sentence(
            exc.NegativeWeight, f'coupling entries must be non-negative, minimum is {values.min()}'
        )
    if not sparse.issparse(matrix):
        matrix = _frozen(matrix)
    rows = np.asarray(matrix.sum(axis=1), dtype=float).reshape(-1)
    cols = np.asarray(matrix.sum(axis=0), dtype=float).reshape(-1)
    row_marginal = rows if row_marginal is None else np.asarray(row_marginal, dtype=float)
    col_marginal = cols if col_marginal is None else np.asarray(col_marginal, dtype=float)
    if row_marginal.shape != rows.shape or col_marginal.shape != cols.shape:
        raise exc.sentence(
            exc.DimensionMismatch,
            f'coupling of shape {matrix.shape} against marginals of sizes '
            f'{row_marginal.shape[0]} and {col_marginal.shape[0]}',
        )
    residual = max(
        np.max(np.abs(rows - row_marginal), initial=0.0),
        np.max(np.abs(cols - col_marginal), initial=0.0),
    )
    if residual > atol:
        raise exc.sentence(
            exc.InfeasibleMarginals, f'coupling marginals off by {residual:.3e}'
        )
    return Coupling(matrix, _frozen(row_marginal), _frozen(col_marginal))


def total_variation(first: Coupling, second: Coupling) -> float:
    """Total-variation distance between two plans of the same shape."""
    if first.shape != second.shape:
        raise exc.sentence(
            exc.DimensionMismatch, f'couplings of shapes {first.shape} and {second.shape}'
        )
    return 0.5 * float(np.abs(first.dense() - second.dense()).sum())


@dataclass(frozen=True, eq=False)
class GaussianMeasure:
    mean: np.ndarray
    covariance: np.ndarray

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def make_gaussian(mean: ArrayLike, covariance: ArrayLike) -> GaussianMeasure:
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    covariance = np.atleast_2d(np.asarray(covariance, dtype=float))
    p = mean.shape[0]
    if mean.ndim != 1 or covariance.shape != (p, p):
        raise exc.sentence(
            exc.DimensionMismatch,
            f'mean of size {p} with covariance of shape {covariance.shape}',
        )
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(covariance))):
        raise exc.sentence(exc.NonFiniteValue, 'mean and covariance must be finite')
    scale = max(1.0, float(np.max(np.abs(covariance))))
    if np.max(np.abs(covariance - covariance.T)) > 1e-12 * scale:
        raise exc.sentence(exc.NotSymmetric, 'covariance must be symmetric')
    if np.linalg.eigvalsh(covariance)[0] < -1e-10:
        raise exc.sentence(exc.NotPositiveSemidefinite, 'covariance must be PSD')
    return GaussianMeasure(_frozen(mean), _frozen(covariance))


@dataclass(frozen=True, eq=False)
class Subspace:
    """Orthonormal basis of E (d×k) with an orthonormal basis of E⊥ (d×(d−k))."""

    basis: np.ndarray
    complement_basis: np.ndarray

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @lazymethod
    def frame(self) -> np.ndarray:
        """The orthogonal matrix [basis | complement_basis]."""
        return _frozen(np.hstack((self.basis, self.complement_basis)))


def _check_orthonormal(vectors: np.ndarray, what: str) -> None:
    gram = vectors.T @ vectors
    if np.max(np.abs(gram - np.eye(gram.shape[0])), initial=0.0) > ORTHONORMAL_TOL:
        raise exc.sentence(exc.NotOrthonormal, f'{what} columns are not orthonormal')


def make_subspace(basis: ArrayLike, complement_basis: ArrayLike | None = None) -> Subspace:
    """Validate an orthonormal basis and complete it into an orthogonal frame."""
    basis = np.asarray(basis, dtype=float)
    if basis.ndim == 1:
        basis = basis.reshape(-1, 1)
    d, k = basis.shape
    if not 1 <= k <= d:
        raise exc.sentence(
            exc.DimensionMismatch, f'a subspace of R^{d} cannot have dimension {k}'
        )
    _check_orthonormal(basis, 'basis')
    if complement_basis is None:
        complement_basis = orient_columns(scipy.linalg.null_space(basis.T))
    complement_basis = np.asarray(complement_basis, dtype=float).reshape(d, d - k)
    _check_orthonormal(complement_basis, 'complement basis')
    if np.max(np.abs(complement_basis.T @ basis), initial=0.0) > ORTHONORMAL_TOL:
        raise exc.sentence(exc.NotOrthonormal, 'complement is not orthogonal to the basis')
    return Subspace(_frozen(basis), _frozen(complement_basis))


def subspace_from_vectors(vectors: ArrayLike) -> Subspace:
    """Span of arbitrary independent columns, orthonormalized by QR."""
    vectors = np.asarray(vectors, dtype=float)
    if vectors.ndim == 1:
        vectors = vectors.reshape(-1, 1)
    q, r = np.linalg.qr(vectors)
    diagonal = np.diag(r)
    if np.any(np.abs(diagonal) <= 1e-12):
        raise exc.sentence(exc.NotOrthonormal, 'spanning vectors are linearly dependent')
    return make_subspace(q * np.sign(diagonal))


def coordinate_subspace(d: int, axes: Iterable[int]) -> Subspace:
    axes = list(axes)
    others = [axis for axis in range(d) if axis not in axes]
    identity = np.eye(d)
    return make_subspace(identity[:, axes], identity[:, others])


def full_subspace(d: int) -> Subspace:
    return coordinate_subspace(d, range(d))


def weighted_covariance(mu: DiscreteMeasure) -> np.ndarray:
    centered = mu.points - mu.weights @ mu.points
    return (centered * mu.weights[:, None]).T @ centered


def pca_subspace(mu: DiscreteMeasure, k: int) -> Subspace:
    """First `k` principal directions of `mu` (descending eigenvalues)."""
    if not 1 <= k <= mu.dim:
        raise exc.sentence(
            exc.DimensionMismatch, f'cannot take {k} principal axes in dimension {mu.dim}'
        )
    eigenvalues, eigenvectors = np.linalg.eigh(weighted_covariance(mu))
    order = np.argsort(-eigenvalues, kind='stable')
    frame = orient_columns(eigenvectors[:, order])
    return make_subspace(frame[:, :k], frame[:, k:])


def _check_ambient(mu: DiscreteMeasure, subspace: Subspace) -> None:
    if mu.dim != subspace.ambient_dim:
        raise exc.sentence(
            exc.DimensionMismatch,
            f'points live in R^{mu.dim} but the subspace in R^{subspace.ambient_dim}',
        )


def project_measure(mu: DiscreteMeasure, subspace: Subspace) -> DiscreteMeasure:
    """Push-forward of `mu` by the coordinate map x ↦ basisᵀx."""
    _check_ambient(mu, subspace)
    return DiscreteMeasure(_frozen(mu.points @ subspace.basis), mu.weights)


def split_coordinates(
    mu: DiscreteMeasure, subspace: Subspace
) -> tuple[DiscreteMeasure, np.ndarray]:
    """Coordinates of every atom in E (as a measure) and in E⊥ (as a matrix)."""
    _check_ambient(mu, subspace)
    return project_measure(mu, subspace), _frozen(mu.points @ subspace.complement_basis)


def reassemble(
    e_coords: ArrayLike, perp_coords: ArrayLike, subspace: Subspace
) -> np.ndarray:
    e_coords = np.asarray(e_coords, dtype=float).reshape(-1, subspace.dim)
    perp_coords = np.asarray(perp_coords, dtype=float).reshape(
        -1, subspace.ambient_dim - subspace.dim
    )
    return e_coords @ subspace.basis.T + perp_coords @ subspace.complement_basis.T


def read_point_cloud(path: Path | str) -> DiscreteMeasure:
    """Read `x0,...,x{d-1}[,w]` CSV; a trailing `w` column holds the weights."""
    path = Path(path)
    with path.open(newline='') as stream:
        header = next(csv.reader(stream), None)
    if not header:
        raise exc.sentence(exc.ParseError, f'{path} has no header row')
    names = [name.strip() for name in header]
    weighted = names[-1] == 'w'
    coordinates = names[:-1] if weighted else names
    expected = [f'x{index}' for index in range(len(coordinates))]
    if coordinates != expected or not coordinates:
        raise exc.sentence(
            exc.ParseError, f'{path} header must read {",".join(expected) or "x0"}[,w]'
        )
    try:
        data = np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)
    except ValueError as err:
        raise exc.sentence(exc.ParseError, f'{path}: {err}') from err
    if data.shape[1] != len(names):
        raise exc.sentence(exc.ParseError, f'{path} rows do not match the header')
    if weighted:
        return make_discrete_measure(data[:, :-1], data[:, -1])
    return make_discrete_measure(data)


def write_point_cloud(path: Path | str, mu: DiscreteMeasure, *, weighted: bool = True) -> None:
    names: Sequence[str] = [f'x{index}' for index in range(mu.dim)]
    data = mu.points
    if weighted:
        names = [*names, 'w']
        data = np.column_stack((mu.points, mu.weights))
    np.savetxt(path, data, delimiter=',', header=','.join(names), comments='', fmt='%.17g')
