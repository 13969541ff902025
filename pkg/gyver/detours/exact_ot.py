"""Exact discrete Kantorovich solver and monotone 1D couplings."""

import logging
import warnings
from typing import NamedTuple, TypeAlias

import numpy as np
import ot
from numpy.typing import ArrayLike
from scipy import sparse
from scipy.spatial.distance import cdist

from gyver.detours import exc
from gyver.detours.enums import Direction
from gyver.detours.measures import (
    MARGINAL_TOL,
    ZERO_MASS,
    Coupling,
    DiscreteMeasure,
    make_coupling,
)

logger = logging.getLogger(__name__)

CostMatrix: TypeAlias = np.ndarray
Triplets: TypeAlias = tuple[np.ndarray, np.ndarray, np.ndarray]

DEFAULT_MAX_PIVOTS = 1_000_000


class KantorovichSolution(NamedTuple):
    coupling: Coupling
    value: float


def _marginal(values: ArrayLike, name: str) -> np.ndarray:
    values = np.asarray(values, dtype=float).reshape(-1)
    if not np.all(np.isfinite(values)):
        raise exc.sentence(exc.NonFiniteValue, f'{name} must be finite')
    if np.any(values < 0):
        raise exc.sentence(exc.NegativeWeight, f'{name} must be non-negative')
    return values


def as_cost_matrix(entries: ArrayLike, shape: tuple[int, int] | None = None) -> CostMatrix:
    cost = np.asarray(entries, dtype=float)
    if cost.ndim != 2 or (shape is not None and cost.shape != shape):
        raise exc.sentence(
            exc.DimensionMismatch, f'cost matrix of shape {cost.shape}, expected {shape}'
        )
    if not np.all(np.isfinite(cost)):
        raise exc.sentence(exc.NonFiniteValue, 'cost entries must be finite')
    return cost


def sqeuclidean_cost(x: ArrayLike, y: ArrayLike) -> CostMatrix:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return cdist(x.reshape(len(x), -1), y.reshape(len(y), -1), 'sqeuclidean')


def solve_kantorovich(
    cost: ArrayLike,
    p: ArrayLike,
    q: ArrayLike,
    *,
    max_pivots: int = DEFAULT_MAX_PIVOTS,
) -> KantorovichSolution:
    """Exact optimal plan of min <C, γ> over Π(p, q) by network simplex.

    Atoms lighter than 1e-15 are dropped before solving and get empty rows or
    columns in the returned plan.
    """
    p = _marginal(p, 'row marginal')
    q = _marginal(q, 'column marginal')
    cost = as_cost_matrix(cost, (p.shape[0], q.shape[0]))
    mismatch = abs(p.sum() - q.sum())
    if mismatch > MARGINAL_TOL:
        raise exc.sentence(exc.InfeasibleMarginals, f'marginal masses differ by {mismatch:.3e}')

    rows = np.flatnonzero(p >= ZERO_MASS)
    cols = np.flatnonzero(q >= ZERO_MASS)
    if rows.size == 0 or cols.size == 0:
        raise exc.sentence(exc.InfeasibleMarginals, 'marginals carry no mass')
    sub_cost = np.ascontiguousarray(cost[np.ix_(rows, cols)])
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        plan, log = ot.emd(
            np.ascontiguousarray(p[rows]),
            np.ascontiguousarray(q[cols]),
            sub_cost,
            numItermax=max_pivots,
            log=True,
        )
    if log.get('warning') is not None:
        raise exc.sentence(exc.NumericalFailure, f'network simplex: {log["warning"]}')
    plan = np.asarray(plan, dtype=float)
    if not np.all(np.isfinite(plan)):
        raise exc.sentence(exc.NumericalFailure, 'network simplex returned non-finite masses')

    matrix = np.zeros(cost.shape)
    matrix[np.ix_(rows, cols)] = np.maximum(plan, 0.0)
    try:
        coupling = make_coupling(matrix, p, q)
    except exc.InfeasibleMarginals as err:
        raise exc.sentence(exc.NumericalFailure, f'network simplex plan infeasible: {err}') from err
    value = float(np.sum(cost * matrix))
    logger.debug('kantorovich %dx%d solved, value %.6g', *cost.shape, value)
    return KantorovichSolution(coupling, value)


def north_west_corner(a: np.ndarray, b: np.ndarray) -> Triplets:
    """Greedy staircase plan between two ordered mass vectors."""
    n, m = len(a), len(b)
    rows: list[int] = []
    cols: list[int] = []
    masses: list[float] = []
    i = j = 0
    left_a, left_b = float(a[0]), float(b[0])
    while i < n and j < m:
        mass = min(left_a, left_b)
        if mass > 0:
            rows.append(i)
            cols.append(j)
            masses.append(mass)
        left_a -= mass
        left_b -= mass
        if left_a == 0.0:
            i += 1
            if i < n:
                left_a = float(a[i])
        if left_b == 0.0:
            j += 1
            if j < m:
                left_b = float(b[j])
    return np.asarray(rows, dtype=int), np.asarray(cols, dtype=int), np.asarray(masses)


def monotone_plan(
    x: ArrayLike,
    p: ArrayLike,
    y: ArrayLike,
    q: ArrayLike,
    direction: Direction = Direction.ASCENDING,
) -> Triplets:
    """Monotone plan between two weighted 1D supports, as sparse triplets.

    Both supports are sorted stably, so ties keep their original index order.
    The descending plan walks `y` from its largest value down.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    order_x = np.argsort(x, kind='stable')
    keys = y if direction is Direction.ASCENDING else -y
    order_y = np.argsort(keys, kind='stable')
    rows, cols, masses = north_west_corner(
        np.asarray(p, dtype=float)[order_x], np.asarray(q, dtype=float)[order_y]
    )
    return order_x[rows], order_y[cols], masses


def triplets_to_coupling(
    triplets: Triplets, p: ArrayLike, q: ArrayLike
) -> Coupling:
    rows, cols, masses = triplets
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    matrix = sparse.csr_array((masses, (rows, cols)), shape=(p.shape[0], q.shape[0]))
    return make_coupling(matrix, p, q)


def _require_1d(mu: DiscreteMeasure, name: str) -> None:
    if mu.dim != 1:
        raise exc.sentence(
            exc.DimensionMismatch, f'{name} must be one-dimensional, got dimension {mu.dim}'
        )


def wasserstein_1d_coupling(mu: DiscreteMeasure, nu: DiscreteMeasure) -> Coupling:
    """Increasing rearrangement between two 1D measures."""
    _require_1d(mu, 'mu')
    _require_1d(nu, 'nu')
    triplets = monotone_plan(mu.points[:, 0], mu.weights, nu.points[:, 0], nu.weights)
    return triplets_to_coupling(triplets, mu.weights, nu.weights)
