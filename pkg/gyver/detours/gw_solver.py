"""Discrete Gromov-Wasserstein by conditional gradient.

The square loss tensor `L[i, j, k, l] = (Cx[i, k] - Cy[j, l]) ** 2` is never
materialized: `L ⊗ γ` is contracted with three matrix products, so an iteration
costs `O(n²m + nm²)`.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from typing import TypeAlias

import numpy as np
from numpy.typing import ArrayLike
from scipy import sparse
from scipy.spatial.distance import cdist

from gyver.detours import exc
from gyver.detours.exact_ot import solve_kantorovich
from gyver.detours.functions import lazymethod
from gyver.detours.measures import MARGINAL_TOL, Coupling, Matrix, make_coupling

logger = logging.getLogger(__name__)

SimilarityMatrix: TypeAlias = np.ndarray
TensorProduct: TypeAlias = Callable[[Matrix], np.ndarray]
LinearOracle: TypeAlias = Callable[[np.ndarray], np.ndarray]

SYMMETRY_TOL = 1e-10
DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 1000
_TINY = 1e-300


def as_similarity_matrix(entries: ArrayLike) -> SimilarityMatrix:
    matrix = np.asarray(entries, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise exc.sentence(
            exc.DimensionMismatch, f'a similarity matrix must be square, got {matrix.shape}'
        )
    if not np.all(np.isfinite(matrix)):
        raise exc.sentence(exc.NonFiniteValue, 'similarity entries must be finite')
    asymmetry = float(np.max(np.abs(matrix - matrix.T), initial=0.0))
    if asymmetry > SYMMETRY_TOL * max(1.0, float(np.max(np.abs(matrix), initial=0.0))):
        raise exc.sentence(exc.NotSymmetric, f'similarity matrix asymmetric by {asymmetry:.3e}')
    return matrix


def _points(points: ArrayLike) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    return points.reshape(len(points), -1)


def squared_distance_matrix(points: ArrayLike) -> SimilarityMatrix:
    points = _points(points)
    return cdist(points, points, 'sqeuclidean')


def gram_matrix(points: ArrayLike) -> SimilarityMatrix:
    points = _points(points)
    return points @ points.T


def plan_matrix(plan: Coupling | Matrix) -> Matrix:
    if isinstance(plan, Coupling):
        return plan.matrix
    if sparse.issparse(plan):
        return plan
    return np.asarray(plan, dtype=float)


def frobenius(plan: Matrix, dense: np.ndarray) -> float:
    """<plan, dense> for a dense or sparse `plan`."""
    if sparse.issparse(plan):
        return float(plan.multiply(dense).sum())  # type: ignore[union-attr]
    return float(np.sum(plan * dense))


def plan_sums(plan: Matrix) -> tuple[np.ndarray, np.ndarray]:
    rows = np.asarray(plan.sum(axis=1), dtype=float).reshape(-1)
    cols = np.asarray(plan.sum(axis=0), dtype=float).reshape(-1)
    return rows, cols


@dataclass(frozen=True, eq=False)
class SquareLossTensor:
    """`M ↦ L ⊗ M` for the square loss between two similarity matrices.

    Linear in `M`; the row and column sums of `M` stand in for the marginals, so
    the same operator applies to couplings and to differences of couplings.
    """

    cx: SimilarityMatrix
    cy: SimilarityMatrix

    @lazymethod
    def cx_squared(self) -> np.ndarray:
        return self.cx * self.cx

    @lazymethod
    def cy_squared(self) -> np.ndarray:
        return self.cy * self.cy

    @property
    def shape(self) -> tuple[int, int]:
        return self.cx.shape[0], self.cy.shape[0]

    def __call__(self, plan: Matrix) -> np.ndarray:
        if plan.shape != self.shape:
            raise exc.sentence(
                exc.DimensionMismatch, f'plan of shape {plan.shape}, expected {self.shape}'
            )
        p, q = plan_sums(plan)
        marginal_terms = (self.cx_squared() @ p)[:, None] + (self.cy_squared() @ q)[None, :]
        cross = self.cx @ np.asarray(plan @ self.cy.T)
        return marginal_terms - 2.0 * cross


def _tensor(cx: ArrayLike, cy: ArrayLike) -> SquareLossTensor:
    return SquareLossTensor(as_similarity_matrix(cx), as_similarity_matrix(cy))


def gw_tensor_product(cx: ArrayLike, cy: ArrayLike, plan: Coupling | Matrix) -> np.ndarray:
    return _tensor(cx, cy)(plan_matrix(plan))


def gw_energy(cx: ArrayLike, cy: ArrayLike, plan: Coupling | Matrix) -> float:
    matrix = plan_matrix(plan)
    return max(0.0, frobenius(matrix, _tensor(cx, cy)(matrix)))


@dataclass(frozen=True, eq=False)
class CGReport:
    coupling: Coupling
    energy_trace: np.ndarray
    iterations: int
    converged: bool
    gap: float

    @property
    def energy(self) -> float:
        return float(self.energy_trace[-1])


def _check_marginals(p: ArrayLike, q: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=float).reshape(-1)
    q = np.asarray(q, dtype=float).reshape(-1)
    if np.any(p < 0) or np.any(q < 0):
        raise exc.sentence(exc.InfeasibleMarginals, 'marginals must be non-negative')
    if abs(p.sum() - q.sum()) > MARGINAL_TOL:
        raise exc.sentence(
            exc.InfeasibleMarginals, f'marginal masses {p.sum()} and {q.sum()} differ'
        )
    return p, q


def _initial_plan(init: Coupling | None, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    if init is None:
        return np.outer(p, q)
    if init.shape != (p.shape[0], q.shape[0]):
        raise exc.sentence(
            exc.DimensionMismatch, f'initial coupling of shape {init.shape}, expected '
            f'{(p.shape[0], q.shape[0])}'
        )
    gamma = np.array(init.dense(), dtype=float)
    rows, cols = plan_sums(gamma)
    residual = max(np.max(np.abs(rows - p)), np.max(np.abs(cols - q)))
    if residual > MARGINAL_TOL:
        raise exc.sentence(
            exc.InfeasibleMarginals, f'initial coupling marginals off by {residual:.3e}'
        )
    return gamma


def _finite_energy(value: float, label: str, iteration: int) -> float:
    if not np.isfinite(value):
        raise exc.sentence(exc.NonFiniteEnergy, f'{label} energy diverged at iteration {iteration}')
    return max(0.0, value)


def conditional_gradient(
    tensor: TensorProduct,
    p: ArrayLike,
    q: ArrayLike,
    *,
    init: Coupling | None = None,
    oracle: LinearOracle | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    label: str = 'gw',
) -> CGReport:
    """Minimize the quadratic energy `<L ⊗ γ, γ>` over a polytope of couplings.

    `oracle` returns the vertex minimizing `<G, s>`; it defaults to the exact
    Kantorovich solver over Π(p, q). Each step uses the exact minimizer of the
    quadratic `E(γ + τ(s - γ))` over `τ ∈ [0, 1]`, so the energy trace never
    increases.
    """
    p, q = _check_marginals(p, q)
    if oracle is None:

        def oracle(gradient: np.ndarray) -> np.ndarray:
            return solve_kantorovich(gradient, p, q).coupling.dense()

    gamma = _initial_plan(init, p, q)
    product = tensor(gamma)
    energy = _finite_energy(frobenius(gamma, product), label, 0)
    trace = [energy]
    converged = False
    gap = float('inf')
    iterations = 0

    for iteration in range(1, max_iter + 1):
        if energy == 0.0:
            converged, gap = True, 0.0
            break
        gradient = 2.0 * product
        vertex = oracle(gradient)
        direction = vertex - gamma
        slope = frobenius(direction, gradient)
        gap = -slope
        if gap <= tol * max(energy, _TINY):
            converged = True
            break
        curvature = frobenius(direction, tensor(direction))
        if curvature > 0:
            tau = min(max(-slope / (2.0 * curvature), 0.0), 1.0)
        else:
            tau = 1.0 if curvature + slope < 0 else 0.0
        if tau == 0.0:
            converged = True
            break
        candidate = (1.0 - tau) * gamma + tau * vertex
        candidate_product = tensor(candidate)
        candidate_energy = _finite_energy(
            frobenius(candidate, candidate_product), label, iteration
        )
        if candidate_energy > energy:
            logger.debug('%s: step %d rejected, energy would rise', label, iteration)
            converged = True
            break
        decrease = (energy - candidate_energy) / max(energy, _TINY)
        gamma, product, energy = candidate, candidate_product, candidate_energy
        trace.append(energy)
        iterations = iteration
        logger.debug('%s: iteration %d, tau %.4g, energy %.10g', label, iteration, tau, energy)
        if decrease < tol:
            converged = True
            break

    if not converged:
        logger.info('%s: stopped after %d iterations without converging', label, iterations)
    else:
        logger.info('%s: converged after %d iterations, energy %.6g', label, iterations, energy)
    return CGReport(
        coupling=make_coupling(gamma, p, q),
        energy_trace=np.asarray(trace),
        iterations=iterations,
        converged=converged,
        gap=max(gap, 0.0) if np.isfinite(gap) else gap,
    )


def solve_gw_cg(
    cx: ArrayLike,
    cy: ArrayLike,
    p: ArrayLike,
    q: ArrayLike,
    init: Coupling | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> CGReport:
    tensor = _tensor(cx, cy)
    p = np.asarray(p, dtype=float).reshape(-1)
    q = np.asarray(q, dtype=float).reshape(-1)
    if (p.shape[0], q.shape[0]) != tensor.shape:
        raise exc.sentence(
            exc.DimensionMismatch,
            f'marginals of sizes {p.shape[0]} and {q.shape[0]} against '
            f'similarities of sizes {tensor.shape}',
        )
    return conditional_gradient(tensor, p, q, init=init, max_iter=max_iter, tol=tol)
