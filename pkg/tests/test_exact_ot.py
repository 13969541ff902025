import numpy as np
import pytest

from gyver.detours import exc
from gyver.detours.enums import Direction
from gyver.detours.exact_ot import (
    monotone_plan,
    north_west_corner,
    solve_kantorovich,
    sqeuclidean_cost,
    triplets_to_coupling,
    wasserstein_1d_coupling,
)
from gyver.detours.measures import make_discrete_measure
from tests.oracles import permutation_plans, random_couplings


def test_zero_cost():
    solution = solve_kantorovich(np.zeros((3, 2)), np.full(3, 1 / 3), [0.5, 0.5])

    assert solution.value == 0.0
    assert solution.coupling.marginal_residual() <= 1e-9


def test_zero_cost_matching():
    solution = solve_kantorovich([[0.0, 1.0], [1.0, 0.0]], [0.5, 0.5], [0.5, 0.5])

    np.testing.assert_allclose(solution.coupling.dense(), np.diag([0.5, 0.5]))
    assert solution.value == 0.0


@pytest.mark.parametrize('n', [3, 5, 6])
def test_matches_best_permutation(rng, n):
    cost = rng.uniform(size=(n, n))
    uniform = np.full(n, 1.0 / n)

    solution = solve_kantorovich(cost, uniform, uniform)

    best = min(float(np.sum(cost * plan)) for plan in permutation_plans(n))
    assert solution.value == pytest.approx(best, abs=1e-9)
    assert solution.coupling.marginal_residual() <= 1e-9


def test_mass_mismatch():
    with pytest.raises(exc.InfeasibleMarginals):
        solve_kantorovich(np.zeros((2, 2)), [0.5, 0.5], [0.5, 0.6])


def test_shape_mismatch():
    with pytest.raises(exc.DimensionMismatch):
        solve_kantorovich(np.zeros((2, 3)), [0.5, 0.5], [0.5, 0.5])


def test_zero_mass_atoms_are_dropped():
    solution = solve_kantorovich(np.ones((3, 2)), [0.5, 0.5, 0.0], [0.5, 0.5])

    np.testing.assert_array_equal(solution.coupling.dense()[2], [0.0, 0.0])
    assert solution.value == pytest.approx(1.0)


def test_north_west_corner_splits_mass():
    rows, cols, masses = north_west_corner(np.array([0.3, 0.7]), np.array([0.7, 0.3]))

    assert rows.tolist() == [0, 1, 1]
    assert cols.tolist() == [0, 0, 1]
    np.testing.assert_allclose(masses, [0.3, 0.4, 0.3])


def test_monotone_plan_breaks_ties_by_index():
    rows, cols, _ = monotone_plan([1.0, 1.0], [0.5, 0.5], [0.0, 0.0], [0.5, 0.5])

    assert rows.tolist() == [0, 1]
    assert cols.tolist() == [0, 1]


def test_descending_plan():
    rows, cols, _ = monotone_plan(
        [1.0, 2.0, 3.0], np.full(3, 1 / 3), [10.0, 20.0, 30.0], np.full(3, 1 / 3),
        Direction.DESCENDING,
    )

    assert dict(zip(rows.tolist(), cols.tolist())) == {0: 2, 1: 1, 2: 0}


def test_increasing_rearrangement():
    coupling = wasserstein_1d_coupling(
        make_discrete_measure([[2.0], [1.0]]), make_discrete_measure([[5.0], [6.0]])
    )

    assert coupling.is_sparse
    np.testing.assert_allclose(coupling.dense(), [[0.0, 0.5], [0.5, 0.0]])


def test_identical_measures_give_a_diagonal():
    mu = make_discrete_measure([[3.0], [1.0], [2.0]])

    coupling = wasserstein_1d_coupling(mu, mu)

    np.testing.assert_allclose(coupling.dense(), np.eye(3) / 3)
    assert coupling.cost(sqeuclidean_cost(mu.points, mu.points)) == 0.0


def test_mass_splitting_matches_the_linear_program():
    mu = make_discrete_measure([[0.0], [1.0]], [0.3, 0.7])
    nu = make_discrete_measure([[0.5], [4.0]], [0.7, 0.3])
    cost = sqeuclidean_cost(mu.points, nu.points)

    coupling = wasserstein_1d_coupling(mu, nu)

    assert coupling.cost(cost) == pytest.approx(
        solve_kantorovich(cost, mu.weights, nu.weights).value, abs=1e-10
    )


def test_monotone_coupling_beats_random_plans(rng):
    mu = make_discrete_measure(rng.standard_normal((6, 1)), rng.dirichlet(np.ones(6)))
    nu = make_discrete_measure(rng.standard_normal((5, 1)), rng.dirichlet(np.ones(5)))
    cost = sqeuclidean_cost(mu.points, nu.points)

    value = wasserstein_1d_coupling(mu, nu).cost(cost)

    for plan in random_couplings(rng, mu.weights, nu.weights, 100):
        assert value <= float(np.sum(cost * plan)) + 1e-12


def test_wasserstein_1d_needs_one_dimension():
    with pytest.raises(exc.DimensionMismatch):
        wasserstein_1d_coupling(
            make_discrete_measure(np.zeros((2, 2))), make_discrete_measure(np.zeros((2, 1)))
        )


def test_triplets_to_coupling_is_sparse():
    coupling = triplets_to_coupling(
        (np.array([0, 1]), np.array([1, 0]), np.array([0.5, 0.5])), [0.5, 0.5], [0.5, 0.5]
    )

    assert coupling.is_sparse
    assert coupling.shape == (2, 2)
