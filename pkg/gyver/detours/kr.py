"""Knothe-Rosenblatt couplings on discrete measures.

The recursion walks coordinates in order. At each level every cell (a pair of
conditional measures sharing the previous coordinates) is split into slices by
the value of the current coordinate, the slices are coupled in 1D, and each
matched pair of slices becomes a cell of the next level carrying its share of
mass. The classical construction always couples slices increasingly; the
alternate one picks, per cell, whichever monotone direction solves the 1D inner
Gromov-Wasserstein problem.
"""

import logging
from collections import Counter
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from gyver.detours import exc
from gyver.detours.enums import Direction
from gyver.detours.exact_ot import Triplets, monotone_plan, triplets_to_coupling
from gyver.detours.gw_1d import inner_gw_1d_arrays
from gyver.detours.measures import Coupling, DiscreteMeasure

logger = logging.getLogger(__name__)

SliceRule = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], tuple[Direction, Triplets]]


@dataclass(frozen=True, eq=False)
class TriangularCoupling:
    coupling: Coupling
    level_directions: tuple[Direction, ...]
    slice_directions: tuple[tuple[Direction, ...], ...]


@dataclass(frozen=True)
class _Cell:
    src: np.ndarray
    src_mass: np.ndarray
    dst: np.ndarray
    dst_mass: np.ndarray


@dataclass(frozen=True)
class _Slices:
    labels: np.ndarray
    values: np.ndarray
    masses: np.ndarray


def _slices(values: np.ndarray, masses: np.ndarray, quantization: float) -> _Slices:
    keys = values if quantization == 0 else np.round(values / quantization)
    _, labels = np.unique(keys, return_inverse=True)
    labels = labels.reshape(-1)
    totals = np.bincount(labels, weights=masses)
    sums = np.bincount(labels, weights=masses * values)
    plain = np.bincount(labels, weights=values) / np.bincount(labels)
    heavy = totals > 0
    representatives = np.where(heavy, sums / np.where(heavy, totals, 1.0), plain)
    return _Slices(labels, representatives, totals)


def _ascending(x: np.ndarray, p: np.ndarray, y: np.ndarray, q: np.ndarray) -> tuple[Direction, Triplets]:
    return Direction.ASCENDING, monotone_plan(x, p, y, q, Direction.ASCENDING)


def _inner_gw(x: np.ndarray, p: np.ndarray, y: np.ndarray, q: np.ndarray) -> tuple[Direction, Triplets]:
    direction, triplets, _, _ = inner_gw_1d_arrays(x, p, y, q)
    return direction, triplets


def _majority(directions: list[Direction]) -> Direction:
    counts = Counter(directions)
    if counts[Direction.DESCENDING] > counts[Direction.ASCENDING]:
        return Direction.DESCENDING
    return Direction.ASCENDING


def _knothe_rosenblatt(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    rule: SliceRule,
    quantization: float,
    label: str,
) -> TriangularCoupling:
    if mu.dim != nu.dim:
        raise exc.sentence(
            exc.DimensionMismatch, f'measures of dimensions {mu.dim} and {nu.dim}'
        )
    if quantization < 0:
        raise exc.sentence(ValueError, f'quantization must be non-negative, got {quantization}')
    d = mu.dim
    cells = [_Cell(np.arange(mu.size), mu.weights, np.arange(nu.size), nu.weights)]
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    masses: list[np.ndarray] = []
    per_level: list[tuple[Direction, ...]] = []

    for level in range(d):
        last = level == d - 1
        next_cells: list[_Cell] = []
        chosen: list[Direction] = []
        for cell in cells:
            src = _slices(mu.points[cell.src, level], cell.src_mass, quantization)
            dst = _slices(nu.points[cell.dst, level], cell.dst_mass, quantization)
            direction, (src_slices, dst_slices, slice_mass) = rule(
                src.values, src.masses, dst.values, dst.masses
            )
            chosen.append(direction)
            for a, b, w in zip(src_slices, dst_slices, slice_mass):
                in_a = src.labels == a
                in_b = dst.labels == b
                child_src_mass = cell.src_mass[in_a] * (w / src.masses[a])
                child_dst_mass = cell.dst_mass[in_b] * (w / dst.masses[b])
                if last:
                    block = np.outer(child_src_mass, child_dst_mass) / w
                    src_idx, dst_idx = np.meshgrid(cell.src[in_a], cell.dst[in_b], indexing='ij')
                    rows.append(src_idx.reshape(-1))
                    cols.append(dst_idx.reshape(-1))
                    masses.append(block.reshape(-1))
                else:
                    next_cells.append(
                        _Cell(cell.src[in_a], child_src_mass, cell.dst[in_b], child_dst_mass)
                    )
        per_level.append(tuple(chosen))
        logger.debug(
            '%s: level %d coupled %d cells, %d descending',
            label,
            level,
            len(cells),
            chosen.count(Direction.DESCENDING),
        )
        cells = next_cells

    triplets = (np.concatenate(rows), np.concatenate(cols), np.concatenate(masses))
    return TriangularCoupling(
        coupling=triplets_to_coupling(triplets, mu.weights, nu.weights),
        level_directions=tuple(_majority(list(directions)) for directions in per_level),
        slice_directions=tuple(per_level),
    )


def classical_kr(
    mu: DiscreteMeasure, nu: DiscreteMeasure, quantization: float = 0.0
) -> TriangularCoupling:
    return _knothe_rosenblatt(mu, nu, _ascending, quantization, 'classical_kr')


def alternate_kr(
    mu: DiscreteMeasure, nu: DiscreteMeasure, quantization: float = 0.0
) -> TriangularCoupling:
    """Knothe-Rosenblatt coupling whose slices follow the 1D inner-GW direction."""
    return _knothe_rosenblatt(mu, nu, _inner_gw, quantization, 'alternate_kr')
