"""Subspace detours: solve a transport problem between projections, then lift it.

Atoms of a measure are binned by their coordinates in a subspace `E` (exactly,
or on a grid of width `quantization`). A plan between the bins of `μ` on `E`
and the bins of `ν` on `F` is lifted back to the full spaces in one of two
ways:

- Monge-Independent: within each matched pair of bins the conditionals are
  coupled independently.
- Monge-Knothe: within each matched pair the conditionals are coupled by a
  transport solve on their orthogonal coordinates, then optionally refined by
  conditional gradient over the plans that keep the same bin aggregation.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from gyver.detours import exc
from gyver.detours.concurrency import run_concurrently
from gyver.detours.enums import DetourMode, GWLoss, SubspaceSolver
from gyver.detours.exact_ot import solve_kantorovich, sqeuclidean_cost, triplets_to_coupling
from gyver.detours.gw_1d import inner_gw_1d_arrays
from gyver.detours.gw_solver import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    SquareLossTensor,
    conditional_gradient,
    gram_matrix,
    gw_energy,
    solve_gw_cg,
    squared_distance_matrix,
)
from gyver.detours.measures import (
    MARGINAL_TOL,
    ZERO_MASS,
    Coupling,
    DiscreteMeasure,
    Matrix,
    Subspace,
    make_coupling,
    split_coordinates,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Disintegration:
    """Bins of a measure along a subspace.

    `bin_points` are mass-weighted mean subspace coordinates, `labels` maps each
    atom to its bin and `perp` holds each atom's complement coordinates.
    """

    measure: DiscreteMeasure
    bin_points: np.ndarray
    bin_weights: np.ndarray
    labels: np.ndarray
    perp: np.ndarray

    @property
    def size(self) -> int:
        return self.bin_weights.shape[0]

    def members(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    def conditional(self, label: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Atom indices, normalized masses and complement coordinates of one bin."""
        if self.bin_weights[label] < ZERO_MASS:
            raise exc.sentence(exc.EmptyConditional, f'bin {label} carries no mass')
        members = self.members(label)
        return members, self.measure.weights[members] / self.bin_weights[label], self.perp[members]

    def indicator(self) -> sparse.csr_array:
        """n×bins matrix whose column `a` holds the conditional masses of bin `a`."""
        heavy = self.bin_weights >= ZERO_MASS
        scale = np.where(heavy, self.bin_weights, 1.0)[self.labels]
        values = np.where(heavy[self.labels], self.measure.weights / scale, 0.0)
        n = self.measure.size
        return sparse.csr_array((values, (np.arange(n), self.labels)), shape=(n, self.size))


def disintegrate(
    mu: DiscreteMeasure, subspace: Subspace, quantization: float = 0.0
) -> Disintegration:
    if quantization < 0:
        raise exc.sentence(ValueError, f'quantization must be non-negative, got {quantization}')
    projected, perp = split_coordinates(mu, subspace)
    coords = projected.points
    keys = coords if quantization == 0 else np.round(coords / quantization)
    _, labels = np.unique(keys, axis=0, return_inverse=True)
    labels = labels.reshape(-1)
    bins = int(labels.max()) + 1
    weights = np.bincount(labels, weights=mu.weights, minlength=bins)
    counts = np.bincount(labels, minlength=bins)
    points = np.empty((bins, coords.shape[1]))
    for axis in range(coords.shape[1]):
        weighted = np.bincount(labels, weights=mu.weights * coords[:, axis], minlength=bins)
        plain = np.bincount(labels, weights=coords[:, axis], minlength=bins) / counts
        points[:, axis] = np.where(weights > 0, weighted / np.where(weights > 0, weights, 1.0), plain)
    return Disintegration(mu, points, weights, labels, perp)


def aggregate_by_bins(
    full_plan: Coupling | Matrix,
    labels_mu: np.ndarray,
    labels_nu: np.ndarray,
    shape: tuple[int, int],
) -> np.ndarray:
    """Push a full plan forward to bin space: `(π^E, π^F)_# γ`."""
    matrix = full_plan.matrix if isinstance(full_plan, Coupling) else full_plan
    n, m = matrix.shape
    if labels_mu.shape[0] != n or labels_nu.shape[0] != m:
        raise exc.sentence(
            exc.DimensionMismatch, f'labels of sizes {labels_mu.shape[0]}, {labels_nu.shape[0]} '
            f'for a plan of shape {matrix.shape}'
        )
    left = sparse.csr_array((np.ones(n), (labels_mu, np.arange(n))), shape=(shape[0], n))
    right = sparse.csr_array((np.ones(m), (np.arange(m), labels_nu)), shape=(m, shape[1]))
    aggregated = left @ sparse.csr_array(matrix) @ right
    return aggregated.toarray()


@dataclass(frozen=True, eq=False)
class DetourPlan:
    subspace_plan: Coupling
    full_plan: Coupling
    mode: DetourMode
    e_subspace: Subspace
    f_subspace: Subspace


def _solver_failure(err: Exception, what: str) -> exc.SolverFailure:
    return exc.sentence(exc.SolverFailure, f'{what} failed: {err}')


def _bin_plan(
    x: np.ndarray,
    p: np.ndarray,
    y: np.ndarray,
    q: np.ndarray,
    solver: SubspaceSolver,
    max_iter: int,
    tol: float,
) -> Coupling:
    """Plan between two weighted point sets by the chosen solver."""
    if solver is SubspaceSolver.INNER_GW_1D:
        if x.shape[1] != 1 or y.shape[1] != 1:
            raise exc.sentence(
                exc.DimensionMismatch,
                f'inner-gw-1d needs one-dimensional subspaces, got {x.shape[1]} and {y.shape[1]}',
            )
        _, triplets, _, _ = inner_gw_1d_arrays(x[:, 0], p, y[:, 0], q)
        return triplets_to_coupling(triplets, p, q)
    if solver is SubspaceSolver.KANTOROVICH:
        if x.shape[1] != y.shape[1]:
            raise exc.sentence(
                exc.DimensionMismatch,
                f'kantorovich needs equal dimensions, got {x.shape[1]} and {y.shape[1]}',
            )
        return solve_kantorovich(sqeuclidean_cost(x, y), p, q).coupling
    report = solve_gw_cg(
        squared_distance_matrix(x), squared_distance_matrix(y), p, q, max_iter=max_iter, tol=tol
    )
    return report.coupling


def _run_solver(solver: SubspaceSolver, what: str, solve: Callable[[], Coupling]) -> Coupling:
    try:
        return solve()
    except (exc.NumericalFailure, exc.NonFiniteEnergy) as err:
        raise _solver_failure(err, f'{solver} on {what}') from err


def subspace_optimal_plan(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    e_subspace: Subspace,
    f_subspace: Subspace,
    subspace_solver: SubspaceSolver = SubspaceSolver.INNER_GW_1D,
    *,
    quantization: float = 0.0,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> Coupling:
    """Optimal plan between the bins of `μ` on E and of `ν` on F."""
    subspace_solver = SubspaceSolver(subspace_solver)
    source = disintegrate(mu, e_subspace, quantization)
    target = disintegrate(nu, f_subspace, quantization)
    plan = _run_solver(
        subspace_solver,
        'the projected measures',
        lambda: _bin_plan(
            source.bin_points,
            source.bin_weights,
            target.bin_points,
            target.bin_weights,
            subspace_solver,
            max_iter,
            tol,
        ),
    )
    logger.info(
        'subspace plan %s between %d and %d bins', subspace_solver, source.size, target.size
    )
    return plan


def _check_subspace_plan(
    plan: Coupling, source: Disintegration, target: Disintegration
) -> list[tuple[int, int, float]]:
    if plan.shape != (source.size, target.size):
        raise exc.sentence(
            exc.DimensionMismatch,
            f'subspace plan of shape {plan.shape} for {source.size}×{target.size} bins',
        )
    cells = []
    for a, b, w in zip(*plan.support()):
        if w < ZERO_MASS:
            continue
        if source.bin_weights[a] < ZERO_MASS or target.bin_weights[b] < ZERO_MASS:
            raise exc.sentence(
                exc.EmptyConditional, f'cell ({a}, {b}) references a bin without mass'
            )
        cells.append((int(a), int(b), float(w)))
    return cells


def _detour_plan(
    subspace_plan: Coupling,
    full: Matrix,
    source: Disintegration,
    target: Disintegration,
    mode: DetourMode,
    e_subspace: Subspace,
    f_subspace: Subspace,
) -> DetourPlan:
    full_plan = make_coupling(full, source.measure.weights, target.measure.weights)
    aggregated = aggregate_by_bins(full_plan, source.labels, target.labels, subspace_plan.shape)
    residual = float(np.max(np.abs(aggregated - subspace_plan.dense())))
    if residual > MARGINAL_TOL:
        raise exc.sentence(
            exc.NumericalFailure, f'{mode} plan leaves its fiber by {residual:.3e}'
        )
    return DetourPlan(subspace_plan, full_plan, mode, e_subspace, f_subspace)


def _mi_matrix(
    cells: list[tuple[int, int, float]], source: Disintegration, target: Disintegration
) -> sparse.csr_array:
    shape = (source.size, target.size)
    kept = sparse.csr_array(shape)
    if cells:
        rows, cols, masses = (np.asarray(values) for values in zip(*cells))
        kept = sparse.csr_array((masses, (rows, cols)), shape=shape)
    return sparse.csr_array(source.indicator() @ kept @ target.indicator().T)


def monge_independent(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    e_subspace: Subspace,
    f_subspace: Subspace,
    subspace_plan: Coupling,
    *,
    quantization: float = 0.0,
) -> DetourPlan:
    source = disintegrate(mu, e_subspace, quantization)
    target = disintegrate(nu, f_subspace, quantization)
    cells = _check_subspace_plan(subspace_plan, source, target)
    full = _mi_matrix(cells, source, target)
    return _detour_plan(
        subspace_plan, full, source, target, DetourMode.MONGE_INDEPENDENT, e_subspace, f_subspace
    )


def _conditional_plan(
    x: np.ndarray,
    p: np.ndarray,
    y: np.ndarray,
    q: np.ndarray,
    solver: SubspaceSolver,
    max_iter: int,
    tol: float,
) -> np.ndarray:
    if x.shape[0] == 1 or y.shape[0] == 1 or x.shape[1] == 0 or y.shape[1] == 0:
        return np.outer(p, q)
    return _bin_plan(x, p, y, q, solver, max_iter, tol).dense()


def _similarities(mu: DiscreteMeasure, loss: GWLoss) -> np.ndarray:
    if GWLoss(loss) is GWLoss.INNER_PRODUCT:
        return gram_matrix(mu.points)
    return squared_distance_matrix(mu.points)


def _fiber_oracle(
    cells: list[tuple[int, int, float]],
    source: Disintegration,
    target: Disintegration,
    limit: int | None,
) -> Callable[[np.ndarray], np.ndarray]:
    blocks = []
    for a, b, w in cells:
        rows, p, _ = source.conditional(a)
        cols, q, _ = target.conditional(b)
        blocks.append((np.ix_(rows, cols), p, q, w))
    shape = (source.measure.size, target.measure.size)

    def oracle(gradient: np.ndarray) -> np.ndarray:
        def block_task(
            index: tuple[np.ndarray, ...], p: np.ndarray, q: np.ndarray, w: float
        ) -> Callable[[], np.ndarray]:
            return lambda: w * solve_kantorovich(gradient[index], p, q).coupling.dense()

        solved = run_concurrently([block_task(*block) for block in blocks], limit)
        vertex = np.zeros(shape)
        for (index, _, _, _), block in zip(blocks, solved):
            vertex[index] = block
        return vertex

    return oracle


def monge_knothe(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    e_subspace: Subspace,
    f_subspace: Subspace,
    subspace_plan: Coupling,
    orthogonal_solver: SubspaceSolver = SubspaceSolver.KANTOROVICH,
    *,
    quantization: float = 0.0,
    refine: bool = True,
    loss: GWLoss = GWLoss.SQUARE,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    limit: int | None = None,
) -> DetourPlan:
    """Lift `subspace_plan` by coupling the conditionals of every matched cell.

    With `refine`, the glued plan (or the Monge-Independent one, whichever has
    the lower GW energy under `loss`) seeds a conditional-gradient descent whose
    linear oracle solves each cell separately, so the result never leaves the
    fiber of `subspace_plan`.
    """
    orthogonal_solver = SubspaceSolver(orthogonal_solver)
    source = disintegrate(mu, e_subspace, quantization)
    target = disintegrate(nu, f_subspace, quantization)
    cells = _check_subspace_plan(subspace_plan, source, target)

    def cell_task(a: int, b: int, w: float) -> Callable[[], np.ndarray]:
        def solve() -> np.ndarray:
            rows, p, x = source.conditional(a)
            cols, q, y = target.conditional(b)
            local = _run_solver(
                orthogonal_solver,
                f'cell ({a}, {b})',
                lambda: make_coupling(
                    _conditional_plan(x, p, y, q, orthogonal_solver, max_iter, tol)
                ),
            )
            return w * local.dense()

        return solve

    local_plans = run_concurrently([cell_task(a, b, w) for a, b, w in cells], limit)
    rows_out: list[np.ndarray] = []
    cols_out: list[np.ndarray] = []
    masses_out: list[np.ndarray] = []
    for (a, b, _), local in zip(cells, local_plans):
        src_idx, dst_idx = np.meshgrid(source.members(a), target.members(b), indexing='ij')
        rows_out.append(src_idx.reshape(-1))
        cols_out.append(dst_idx.reshape(-1))
        masses_out.append(local.reshape(-1))
    shape = (mu.size, nu.size)
    if cells:
        full: Matrix = sparse.csr_array(
            (np.concatenate(masses_out), (np.concatenate(rows_out), np.concatenate(cols_out))),
            shape=shape,
        )
    else:
        full = sparse.csr_array(shape)
    logger.info('monge-knothe glued %d cells', len(cells))

    if refine and cells:
        tensor = SquareLossTensor(_similarities(mu, loss), _similarities(nu, loss))
        glued = make_coupling(full, mu.weights, nu.weights)
        independent = make_coupling(_mi_matrix(cells, source, target), mu.weights, nu.weights)
        glued_energy = gw_energy(tensor.cx, tensor.cy, glued)
        independent_energy = gw_energy(tensor.cx, tensor.cy, independent)
        start = glued if glued_energy <= independent_energy else independent
        logger.debug(
            'monge-knothe refinement from %s gluing, energies %.6g and %.6g',
            'per-cell' if start is glued else 'independent',
            glued_energy,
            independent_energy,
        )
        report = conditional_gradient(
            tensor,
            mu.weights,
            nu.weights,
            init=start,
            oracle=_fiber_oracle(cells, source, target, limit),
            max_iter=max_iter,
            tol=tol,
            label='monge-knothe',
        )
        full = report.coupling.matrix
    return _detour_plan(
        subspace_plan, full, source, target, DetourMode.MONGE_KNOTHE, e_subspace, f_subspace
    )


def detour_energy(
    plan: DetourPlan | Coupling,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    loss: GWLoss = GWLoss.SQUARE,
) -> float:
    """GW energy of a full-space plan under the square or inner-product loss."""
    coupling = plan.full_plan if isinstance(plan, DetourPlan) else plan
    return gw_energy(_similarities(mu, loss), _similarities(nu, loss), coupling)
