import numpy as np
import pytest
from scipy import sparse
from scipy.spatial.transform import Rotation

from gyver.detours import exc
from gyver.detours.measures import (
    Coupling,
    coordinate_subspace,
    full_subspace,
    make_coupling,
    make_discrete_measure,
    make_gaussian,
    make_subspace,
    orient_columns,
    pca_subspace,
    project_measure,
    read_point_cloud,
    reassemble,
    split_coordinates,
    subspace_from_vectors,
    total_variation,
    write_point_cloud,
)


def test_make_discrete_measure():
    mu = make_discrete_measure([[0.0], [1.0]], [0.5, 0.5])

    assert mu.size == 2
    assert mu.dim == 1
    np.testing.assert_allclose(mu.weights, [0.5, 0.5])


def test_default_weights_are_uniform():
    mu = make_discrete_measure(np.zeros((4, 3)))

    np.testing.assert_allclose(mu.weights, 0.25)


def test_near_unit_weights_are_renormalized():
    mu = make_discrete_measure([[0.0], [1.0]], [0.5, 0.5 + 5e-7])

    assert mu.weights.sum() == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize(
    'points, weights, error',
    [
        ([[0.0], [1.0]], [-0.1, 1.1], exc.NegativeWeight),
        ([[0.0], [1.0]], [2.0, 2.0], exc.WeightSumOutOfTolerance),
        (np.zeros((0, 2)), None, exc.EmptySupport),
        ([[np.nan], [1.0]], None, exc.NonFiniteValue),
        ([[0.0], [1.0]], [1.0], exc.DimensionMismatch),
    ],
)
def test_make_discrete_measure_rejects(points, weights, error):
    with pytest.raises(error):
        make_discrete_measure(points, weights)


def test_measures_are_read_only():
    mu = make_discrete_measure([[0.0], [1.0]])

    with pytest.raises(ValueError):
        mu.points[0, 0] = 3.0


def test_make_coupling_checks_marginals():
    coupling = make_coupling(np.eye(2) / 2, [0.5, 0.5], [0.5, 0.5])

    assert coupling.marginal_residual() == 0.0
    with pytest.raises(exc.InfeasibleMarginals):
        make_coupling(np.eye(2) / 2, [0.7, 0.3], [0.5, 0.5])
    with pytest.raises(exc.NegativeWeight):
        make_coupling([[-0.1, 0.6], [0.5, 0.0]])


def test_sparse_coupling_support_is_row_major():
    matrix = sparse.csr_array(([0.25, 0.5, 0.25], ([1, 0, 1], [2, 1, 0])), shape=(2, 3))
    coupling = make_coupling(matrix)

    rows, cols, masses = coupling.support()

    assert coupling.is_sparse
    assert rows.tolist() == [0, 1, 1]
    assert cols.tolist() == [1, 0, 2]
    np.testing.assert_allclose(masses, [0.5, 0.25, 0.25])
    assert coupling.cost(np.arange(6.0).reshape(2, 3)) == pytest.approx(0.5 + 0.75 + 1.25)


def test_product_and_total_variation():
    product = Coupling.product([0.5, 0.5], [0.5, 0.5])
    diagonal = make_coupling(np.eye(2) / 2)

    np.testing.assert_allclose(product.dense(), 0.25)
    assert total_variation(product, diagonal) == pytest.approx(0.5)
    assert total_variation(diagonal, diagonal) == 0.0


def test_make_gaussian_rejects_bad_covariances():
    with pytest.raises(exc.NotSymmetric):
        make_gaussian([0.0, 0.0], [[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(exc.NotPositiveSemidefinite):
        make_gaussian([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(exc.DimensionMismatch):
        make_gaussian([0.0], np.eye(2))


def test_make_subspace_completes_the_frame(rng):
    basis = Rotation.random(random_state=rng).as_matrix()[:, :2]

    subspace = make_subspace(basis)

    assert subspace.dim == 2
    assert subspace.ambient_dim == 3
    np.testing.assert_allclose(subspace.frame().T @ subspace.frame(), np.eye(3), atol=1e-10)


def test_make_subspace_rejects_non_orthonormal():
    with pytest.raises(exc.NotOrthonormal):
        make_subspace([[1.0], [1.0]])
    with pytest.raises(exc.NotOrthonormal):
        make_subspace([[1.0], [0.0]], [[1.0], [0.0]])


def test_subspace_from_vectors():
    subspace = subspace_from_vectors([[2.0], [0.0], [0.0]])

    np.testing.assert_allclose(subspace.basis[:, 0], [1.0, 0.0, 0.0])
    with pytest.raises(exc.NotOrthonormal):
        subspace_from_vectors([[1.0, 2.0], [1.0, 2.0]])


def test_project_measure_on_first_axis():
    mu = make_discrete_measure([[1.0, 2.0], [3.0, 4.0]])

    projected = project_measure(mu, coordinate_subspace(2, [0]))

    np.testing.assert_allclose(projected.points[:, 0], [1.0, 3.0])
    np.testing.assert_allclose(projected.weights, mu.weights)


def test_project_measure_on_circle_second_axis(rng):
    angles = rng.uniform(0, 2 * np.pi, 12)
    circle = np.column_stack((np.cos(angles), np.sin(angles)))
    mu = make_discrete_measure(circle)

    projected = project_measure(mu, coordinate_subspace(2, [1]))

    np.testing.assert_allclose(projected.points[:, 0], circle[:, 1])


def test_full_space_projection_is_an_isometry(rng):
    mu = make_discrete_measure(rng.standard_normal((6, 3)))
    rotation = make_subspace(Rotation.random(random_state=rng).as_matrix())

    projected = project_measure(mu, rotation)

    original = np.linalg.norm(mu.points[:, None] - mu.points[None], axis=2)
    rotated = np.linalg.norm(projected.points[:, None] - projected.points[None], axis=2)
    np.testing.assert_allclose(rotated, original, atol=1e-10)


def test_project_measure_dimension_mismatch():
    with pytest.raises(exc.DimensionMismatch):
        project_measure(make_discrete_measure(np.zeros((2, 3))), full_subspace(2))


def test_split_then_reassemble_round_trips(rng):
    mu = make_discrete_measure(rng.standard_normal((10, 4)))
    subspace = make_subspace(np.linalg.qr(rng.standard_normal((4, 2)))[0])

    e_part, perp = split_coordinates(mu, subspace)

    np.testing.assert_allclose(reassemble(e_part.points, perp, subspace), mu.points, atol=1e-10)


def test_pca_subspace_finds_the_long_axis(rng):
    points = rng.standard_normal((200, 2)) * [0.1, 3.0]
    subspace = pca_subspace(make_discrete_measure(points), 1)

    assert abs(subspace.basis[1, 0]) > 0.99
    with pytest.raises(exc.DimensionMismatch):
        pca_subspace(make_discrete_measure(points), 3)


def test_orient_columns():
    oriented = orient_columns(np.array([[0.1, 2.0], [-3.0, 1.0]]))

    np.testing.assert_allclose(oriented, [[-0.1, 2.0], [3.0, 1.0]])


def test_point_cloud_files(tmp_path):
    mu = make_discrete_measure([[0.0, 1.0], [2.0, 3.0]], [0.25, 0.75])
    path = tmp_path / 'cloud.csv'

    write_point_cloud(path, mu)
    loaded = read_point_cloud(path)

    assert path.read_text().splitlines()[0] == 'x0,x1,w'
    np.testing.assert_array_equal(loaded.points, mu.points)
    np.testing.assert_array_equal(loaded.weights, mu.weights)


def test_point_cloud_without_weights(tmp_path):
    path = tmp_path / 'cloud.csv'
    path.write_text('x0\n1\n2\n')

    loaded = read_point_cloud(path)

    np.testing.assert_allclose(loaded.weights, [0.5, 0.5])


def test_point_cloud_bad_header(tmp_path):
    path = tmp_path / 'cloud.csv'
    path.write_text('a,b\n1,2\n')

    with pytest.raises(exc.ParseError):
        read_point_cloud(path)
