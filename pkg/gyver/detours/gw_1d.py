"""Closed-form inner-product Gromov-Wasserstein between 1D measures.

The optimum is attained by one of the two monotone couplings, the increasing
one or the one pairing `μ` ascending against `ν` descending. Both are built and
the cheaper is kept.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from gyver.detours import exc
from gyver.detours.enums import Direction
from gyver.detours.exact_ot import Triplets, monotone_plan, triplets_to_coupling
from gyver.detours.measures import Coupling, DiscreteMeasure

logger = logging.getLogger(__name__)

TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MonotoneChoice:
    direction: Direction
    coupling: Coupling
    cost: float
    alternative_cost: float


def monotone_energy(x: np.ndarray, y: np.ndarray, triplets: Triplets) -> float:
    """Inner-product GW energy of a 1D plan given as triplets."""
    rows, cols, masses = triplets
    p = np.bincount(rows, weights=masses, minlength=x.shape[0])
    q = np.bincount(cols, weights=masses, minlength=y.shape[0])
    s = float(np.dot(masses, x[rows] * y[cols]))
    energy = float(np.dot(p, x**2)) ** 2 + float(np.dot(q, y**2)) ** 2 - 2.0 * s**2
    return max(0.0, energy)


def inner_gw_1d_arrays(
    x: ArrayLike, p: ArrayLike, y: ArrayLike, q: ArrayLike
) -> tuple[Direction, Triplets, float, float]:
    """Array-level inner GW: chosen direction, its triplets, its cost, the other cost."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    ascending = monotone_plan(x, p, y, q, Direction.ASCENDING)
    descending = monotone_plan(x, p, y, q, Direction.DESCENDING)
    ascending_cost = monotone_energy(x, y, ascending)
    descending_cost = monotone_energy(x, y, descending)
    if descending_cost < ascending_cost - TIE_TOL:
        return Direction.DESCENDING, descending, descending_cost, ascending_cost
    return Direction.ASCENDING, ascending, ascending_cost, descending_cost


def inner_gw_1d(mu: DiscreteMeasure, nu: DiscreteMeasure) -> MonotoneChoice:
    for name, measure in (('mu', mu), ('nu', nu)):
        if measure.dim != 1:
            raise exc.sentence(
                exc.DimensionMismatch,
                f'{name} must be one-dimensional, got dimension {measure.dim}',
            )
    direction, triplets, cost, other = inner_gw_1d_arrays(
        mu.points[:, 0], mu.weights, nu.points[:, 0], nu.weights
    )
    logger.debug('inner_gw_1d: %s wins, %.6g against %.6g', direction, cost, other)
    return MonotoneChoice(
        direction=direction,
        coupling=triplets_to_coupling(triplets, mu.weights, nu.weights),
        cost=cost,
        alternative_cost=other,
    )
