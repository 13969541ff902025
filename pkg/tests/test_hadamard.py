import numpy as np
import pytest

from gyver.detours import exc
from gyver.detours.config import DEFAULT_T_SCHEDULE
from gyver.detours.enums import Direction
from gyver.detours.gw_1d import inner_gw_1d, monotone_energy
from gyver.detours.hadamard import (
    degenerate_weights,
    hw_distance,
    hw_energy,
    hw_t_schedule,
    hw_tensor_product,
    make_hw_instance,
    solve_hw,
)
from gyver.detours.kr import alternate_kr
from gyver.detours.measures import (
    coordinate_subspace,
    make_coupling,
    make_discrete_measure,
    project_measure,
    total_variation,
)
from tests.oracles import (
    permutation_energies,
    quadruple_hw_energy,
    quadruple_hw_product,
    random_couplings,
    uniform_permutation_plan,
)


def _pair(rng, n, m, d):
    return (
        make_discrete_measure(rng.standard_normal((n, d)), rng.dirichlet(np.ones(n))),
        make_discrete_measure(rng.standard_normal((m, d)), rng.dirichlet(np.ones(m))),
    )


def test_degenerate_weights():
    np.testing.assert_allclose(degenerate_weights(3, 0.1), [1.0, 0.1, 0.01])
    assert degenerate_weights(1, 0.5).tolist() == [1.0]
    assert degenerate_weights(40, 1e-3)[-1] == 1e-18


@pytest.mark.parametrize('t', [0.0, -1.0])
def test_degenerate_weights_rejects_non_positive_t(t):
    with pytest.raises(exc.InvalidSchedule):
        degenerate_weights(2, t)


def test_instance_validation(rng):
    mu, nu = _pair(rng, 3, 3, 2)

    with pytest.raises(exc.InvalidSchedule):
        make_hw_instance(mu, nu, [0.5, 1.0])
    with pytest.raises(exc.InvalidSchedule):
        make_hw_instance(mu, nu, [1.0, 0.0])
    with pytest.raises(exc.DimensionMismatch):
        make_hw_instance(mu, nu, [1.0])
    with pytest.raises(exc.DimensionMismatch):
        make_hw_instance(mu, make_discrete_measure(np.zeros((3, 3))))


@pytest.mark.parametrize('n, m', [(3, 4), (5, 5), (6, 2)])
def test_energy_matches_quadruple_sum(rng, n, m):
    mu, nu = _pair(rng, n, m, 3)
    weights = np.array([1.0, 0.3, 2.0])
    inst = make_hw_instance(mu, nu, weights)
    plan = np.outer(mu.weights, nu.weights)

    assert hw_energy(inst, plan) == pytest.approx(
        quadruple_hw_energy(mu.points, nu.points, weights, plan), abs=1e-10
    )


def test_contraction_on_random_instances(rng):
    for _ in range(50):
        n, m = (int(size) for size in rng.integers(2, 9, size=2))
        d = int(rng.integers(1, 5))
        mu, nu = _pair(rng, n, m, d)
        weights = np.concatenate(([1.0], rng.uniform(0.1, 2.0, size=d - 1)))
        inst = make_hw_instance(mu, nu, weights)
        (plan,) = random_couplings(rng, mu.weights, nu.weights, 1)

        product = hw_tensor_product(inst, plan)

        expected = quadruple_hw_product(mu.points, nu.points, weights, plan)
        np.testing.assert_allclose(product, expected, atol=1e-10)
        energy = hw_energy(inst, plan)
        assert float(np.sum(product * plan)) == pytest.approx(energy, abs=1e-10)
        assert energy == pytest.approx(
            quadruple_hw_energy(mu.points, nu.points, weights, plan), abs=1e-10
        )


def test_tensor_product_matches_quadruple_sum(rng):
    mu, nu = _pair(rng, 4, 5, 3)
    inst = make_hw_instance(mu, nu)
    plan = make_coupling(np.outer(mu.weights, nu.weights))

    product = hw_tensor_product(inst, plan)

    np.testing.assert_allclose(
        product, quadruple_hw_product(mu.points, nu.points, np.ones(3), plan.dense()), atol=1e-10
    )
    assert float(np.sum(product * plan.dense())) == pytest.approx(hw_energy(inst, plan), abs=1e-10)


def test_zero_points_give_a_zero_product():
    mu = make_discrete_measure(np.zeros((3, 2)))
    nu = make_discrete_measure(np.zeros((2, 2)))

    product = hw_tensor_product(make_hw_instance(mu, nu), np.outer(mu.weights, nu.weights))

    np.testing.assert_array_equal(product, np.zeros((3, 2)))


def test_duplicated_targets_give_identical_columns(rng):
    mu = make_discrete_measure(rng.standard_normal((3, 2)))
    row = rng.standard_normal(2)
    nu = make_discrete_measure(np.vstack((row, row, rng.standard_normal(2))))

    product = hw_tensor_product(make_hw_instance(mu, nu), np.outer(mu.weights, nu.weights))

    np.testing.assert_allclose(product[:, 0], product[:, 1])


def test_identity_plan_on_identical_points(rng):
    mu = make_discrete_measure(rng.standard_normal((5, 3)))

    inst = make_hw_instance(mu, mu)

    assert hw_energy(inst, np.eye(5) / 5) == pytest.approx(0.0, abs=1e-12)
    assert hw_distance(inst, np.eye(5) / 5) == 0.0


def test_one_dimension_reduces_to_inner_product_energy(rng):
    mu, nu = _pair(rng, 4, 3, 1)
    choice = inner_gw_1d(mu, nu)
    rows, cols, masses = choice.coupling.support()

    energy = hw_energy(make_hw_instance(mu, nu), choice.coupling)

    assert energy == pytest.approx(
        monotone_energy(mu.points[:, 0], nu.points[:, 0], (rows, cols, masses)), abs=1e-10
    )


def test_axis_reflection_leaves_energy_unchanged(rng):
    for _ in range(50):
        d = int(rng.integers(1, 5))
        mu, nu = _pair(rng, int(rng.integers(2, 7)), int(rng.integers(2, 7)), d)
        plan = rng.uniform(size=(mu.size, nu.size))
        signs = rng.choice([-1.0, 1.0], size=d)
        flipped = mu.with_points(mu.points * signs)

        assert hw_energy(make_hw_instance(flipped, nu), plan) == pytest.approx(
            hw_energy(make_hw_instance(mu, nu), plan), abs=1e-10
        )


def _optimum(mu, nu):
    permutations, energies = permutation_energies(mu.points, nu.points)
    plan = uniform_permutation_plan(permutations[np.argmin(energies)])
    return hw_distance(make_hw_instance(mu, nu), plan)


def test_pseudometric_on_exhaustive_optima(rng):
    for _ in range(50):
        n, d = int(rng.integers(2, 7)), int(rng.integers(1, 4))
        mu, nu, rho = (make_discrete_measure(rng.standard_normal((n, d))) for _ in range(3))

        assert _optimum(mu, mu) == pytest.approx(0.0, abs=1e-9)
        assert _optimum(mu, nu) == pytest.approx(_optimum(nu, mu), abs=1e-10)
        assert _optimum(mu, nu) <= _optimum(mu, rho) + _optimum(rho, nu) + 1e-9


def test_distance_ignores_cancellation_round_off(rng):
    points = rng.standard_normal((6, 3)) * 10.0
    mu = make_discrete_measure(points)
    shuffled = rng.permutation(6)
    nu = make_discrete_measure(points[shuffled])
    plan = uniform_permutation_plan(np.argsort(shuffled))

    assert hw_distance(make_hw_instance(mu, nu), plan) == 0.0
    assert hw_distance(make_hw_instance(mu, nu), np.full((6, 6), 1 / 36)) > 0.0


def test_solve_identical_points_reaches_zero(rng):
    mu = make_discrete_measure(rng.uniform(1.0, 2.0, size=(6, 2)))

    report = solve_hw(make_hw_instance(mu, mu))

    assert report.energy == pytest.approx(0.0, abs=1e-10)
    assert np.all(np.diff(report.energy_trace) <= 1e-12)


def test_solve_runs_stay_feasible_and_monotone(rng):
    for _ in range(100):
        n, m = (int(size) for size in rng.integers(2, 9, size=2))
        mu, nu = _pair(rng, n, m, int(rng.integers(1, 5)))

        report = solve_hw(make_hw_instance(mu, nu))

        assert report.coupling.marginal_residual() <= 1e-9
        assert np.all(np.diff(report.energy_trace) <= 1e-12)


def test_solve_one_dimension_matches_closed_form(rng):
    mu = make_discrete_measure(rng.uniform(1.0, 2.0, size=(7, 1)))
    nu = make_discrete_measure(rng.uniform(1.0, 2.0, size=(6, 1)))

    report = solve_hw(make_hw_instance(mu, nu))

    assert report.energy == pytest.approx(inner_gw_1d(mu, nu).cost, abs=1e-8)
    assert report.coupling.marginal_residual() <= 1e-9


def test_schedule_in_one_dimension_is_constant(rng):
    mu, nu = _pair(rng, 5, 5, 1)

    reports = hw_t_schedule(make_hw_instance(mu, nu), DEFAULT_T_SCHEDULE)

    assert len(reports) == len(DEFAULT_T_SCHEDULE)
    for report in reports[1:]:
        np.testing.assert_allclose(report.coupling.dense(), reports[0].coupling.dense())


def test_single_value_schedule_is_a_plain_solve(rng):
    mu, nu = _pair(rng, 4, 4, 2)
    inst = make_hw_instance(mu, nu)

    (report,) = hw_t_schedule(inst, [1.0])

    np.testing.assert_allclose(report.coupling.dense(), solve_hw(inst).coupling.dense())


def test_schedule_approaches_alternate_kr(gaussian_samples):
    source, target = gaussian_samples

    reports = hw_t_schedule(make_hw_instance(source, target), DEFAULT_T_SCHEDULE)

    reference = alternate_kr(source, target).coupling
    distances = [total_variation(report.coupling, reference) for report in reports]
    assert all(later <= earlier + 1e-9 for earlier, later in zip(distances, distances[1:]))
    assert distances[-1] <= 0.05

    first_axis = coordinate_subspace(2, [0])
    choice = inner_gw_1d(project_measure(source, first_axis), project_measure(target, first_axis))
    assert total_variation(reports[-1].coupling, choice.coupling) == pytest.approx(0.0, abs=1e-12)


def test_nearly_degenerate_weights_follow_the_first_axis(gaussian_samples):
    source, target = gaussian_samples
    first_axis = coordinate_subspace(2, [0])

    report = solve_hw(make_hw_instance(source, target, [1.0, 1e-6]))

    choice = inner_gw_1d(project_measure(source, first_axis), project_measure(target, first_axis))
    assert choice.direction is Direction.DESCENDING
    assert total_variation(report.coupling, choice.coupling) <= 1e-12


@pytest.mark.parametrize('schedule', [[0.1, 1.0], [1.0, -0.1], []])
def test_schedule_rejects_bad_values(rng, schedule):
    mu, nu = _pair(rng, 3, 3, 2)

    with pytest.raises(exc.InvalidSchedule):
        hw_t_schedule(make_hw_instance(mu, nu), schedule)
