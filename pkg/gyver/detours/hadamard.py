"""Hadamard-Wasserstein energy, its degenerated family and solvers.

Per coordinate `t` the loss `(x_i[t] x_k[t] - y_j[t] y_l[t]) ** 2` factors into
rank-one terms, so with `s_t = x_tᵀ γ y_t`

    E(γ) = Σ_t a_t [ (pᵀ x_t²)² + (qᵀ y_t²)² - 2 s_t² ]

where `p`, `q` are the row and column sums of `γ` and `a` the coordinate
weights.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import ArrayLike

from gyver.detours import exc
from gyver.detours.config import validate_schedule
from gyver.detours.functions import lazymethod
from gyver.detours.gw_solver import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    CGReport,
    conditional_gradient,
    plan_matrix,
    plan_sums,
)
from gyver.detours.measures import Coupling, DiscreteMeasure, Matrix

logger = logging.getLogger(__name__)

WEIGHT_FLOOR = 1e-18
ROUND_OFF = 1e-14


def degenerate_weights(d: int, t: float) -> np.ndarray:
    """Diagonal of `A_t = diag(1, t, t², ...)`, floored at 1e-18."""
    if t <= 0:
        raise exc.sentence(exc.InvalidSchedule, f't must be positive, got {t}')
    factors = np.full(d, float(t))
    factors[0] = 1.0
    return np.maximum(np.cumprod(factors), WEIGHT_FLOOR)


@dataclass(frozen=True, eq=False)
class HWInstance:
    x_points: np.ndarray
    y_points: np.ndarray
    p: np.ndarray
    q: np.ndarray
    lambda_weights: np.ndarray

    @property
    def dim(self) -> int:
        return self.x_points.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.x_points.shape[0], self.y_points.shape[0]

    @lazymethod
    def x_squared(self) -> np.ndarray:
        return self.x_points**2

    @lazymethod
    def y_squared(self) -> np.ndarray:
        return self.y_points**2

    def with_weights(self, lambda_weights: ArrayLike) -> 'HWInstance':
        return replace(self, lambda_weights=_check_weights(lambda_weights, self.dim))

    def degenerated(self, t: float) -> 'HWInstance':
        return self.with_weights(degenerate_weights(self.dim, t))

    def __call__(self, plan: Matrix) -> np.ndarray:
        """`L ⊗ plan`, linear in `plan`."""
        _check_plan(self, plan)
        p, q = plan_sums(plan)
        a = self.lambda_weights
        rows = self.x_squared() @ (a * (self.x_squared().T @ p))
        cols = self.y_squared() @ (a * (self.y_squared().T @ q))
        s = _cross_moments(self, plan)
        cross = (self.x_points * (a * s)) @ self.y_points.T
        return rows[:, None] + cols[None, :] - 2.0 * cross


def _check_weights(lambda_weights: ArrayLike, d: int) -> np.ndarray:
    weights = np.asarray(lambda_weights, dtype=float).reshape(-1)
    if weights.shape[0] != d:
        raise exc.sentence(
            exc.DimensionMismatch, f'{weights.shape[0]} coordinate weights for dimension {d}'
        )
    if weights[0] != 1.0 or np.any(weights <= 0) or not np.all(np.isfinite(weights)):
        raise exc.sentence(
            exc.InvalidSchedule,
            f'coordinate weights must be positive with a leading 1, got {weights}',
        )
    return weights


def _check_plan(inst: HWInstance, plan: Matrix) -> None:
    if plan.shape != inst.shape:
        raise exc.sentence(
            exc.DimensionMismatch, f'plan of shape {plan.shape}, expected {inst.shape}'
        )


def _cross_moments(inst: HWInstance, plan: Matrix) -> np.ndarray:
    return np.sum(inst.x_points * np.asarray(plan @ inst.y_points), axis=0)


def _energy_terms(inst: HWInstance, plan: Matrix) -> tuple[np.ndarray, np.ndarray]:
    """Per-coordinate marginal terms and doubled squared cross moments."""
    _check_plan(inst, plan)
    p, q = plan_sums(plan)
    marginal = (p @ inst.x_squared()) ** 2 + (q @ inst.y_squared()) ** 2
    return marginal, 2.0 * _cross_moments(inst, plan) ** 2


def make_hw_instance(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    lambda_weights: ArrayLike | None = None,
) -> HWInstance:
    if mu.dim != nu.dim:
        raise exc.sentence(
            exc.DimensionMismatch, f'point sets of dimensions {mu.dim} and {nu.dim}'
        )
    weights = np.ones(mu.dim) if lambda_weights is None else lambda_weights
    return HWInstance(
        x_points=mu.points,
        y_points=nu.points,
        p=mu.weights,
        q=nu.weights,
        lambda_weights=_check_weights(weights, mu.dim),
    )


def hw_energy(inst: HWInstance, plan: Coupling | Matrix) -> float:
    marginal, cross = _energy_terms(inst, plan_matrix(plan))
    return max(0.0, float(inst.lambda_weights @ (marginal - cross)))


def hw_tensor_product(inst: HWInstance, plan: Coupling | Matrix) -> np.ndarray:
    return inst(plan_matrix(plan))


def hw_distance(inst: HWInstance, plan: Coupling | Matrix) -> float:
    """Square root of the energy.

    Energies below `ROUND_OFF` times the marginal terms count as zero.
    """
    marginal, cross = _energy_terms(inst, plan_matrix(plan))
    scale = float(inst.lambda_weights @ marginal)
    energy = float(inst.lambda_weights @ (marginal - cross))
    if energy <= ROUND_OFF * scale:
        return 0.0
    return float(np.sqrt(energy))


def solve_hw(
    inst: HWInstance,
    init: Coupling | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> CGReport:
    return conditional_gradient(
        inst, inst.p, inst.q, init=init, max_iter=max_iter, tol=tol, label='hw'
    )


def hw_t_schedule(
    inst_base: HWInstance,
    t_values: Sequence[float],
    *,
    init: Coupling | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> list[CGReport]:
    """Solve HW_t along a decreasing schedule, warm-starting each solve."""
    reports: list[CGReport] = []
    previous = init
    for t in validate_schedule(t_values):
        report = solve_hw(inst_base.degenerated(t), init=previous, max_iter=max_iter, tol=tol)
        logger.info('hw_t: t=%g energy %.6g after %d iterations', t, report.energy, report.iterations)
        reports.append(report)
        previous = report.coupling
    return reports
