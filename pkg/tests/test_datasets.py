import numpy as np
import pytest
from scipy.spatial.distance import cdist

from gyver.detours.datasets import (
    bumpy_icosphere,
    gaussian_pair,
    icosphere,
    moons_pair,
    relabel_mesh,
    rotation_2d,
)


def test_moons_are_reproducible():
    first, second = moons_pair(n=20, seed=3), moons_pair(n=20, seed=3)

    np.testing.assert_array_equal(first.source.points, second.source.points)
    np.testing.assert_array_equal(first.target.points, second.target.points)
    assert not np.array_equal(first.source.points, moons_pair(n=20, seed=4).source.points)


def test_moons_ground_truth_points_at_the_rotated_copy(moons):
    rotated = moons.source.points @ rotation_2d(np.pi / 2).T

    np.testing.assert_allclose(moons.target.points[moons.ground_truth], rotated, atol=1e-12)
    assert sorted(moons.ground_truth.tolist()) == list(range(40))


def test_moons_weights_are_uniform(moons):
    np.testing.assert_allclose(moons.source.weights, np.full(40, 1 / 40))
    np.testing.assert_allclose(moons.target.weights, np.full(40, 1 / 40))


def test_gaussian_pair_is_reproducible():
    source, target = gaussian_pair(n=500, seed=1)

    np.testing.assert_array_equal(source.points, gaussian_pair(n=500, seed=1)[0].points)
    assert source.points[:, 0].mean() == pytest.approx(2.0, abs=0.2)
    assert target.points[:, 0].mean() == pytest.approx(-2.0, abs=0.2)
    assert source.points[:, 1].std() == pytest.approx(0.5, abs=0.1)


@pytest.mark.parametrize('subdivisions', [0, 1, 2, 3])
def test_icosphere_size(subdivisions):
    mesh = icosphere(subdivisions)

    assert mesh.size == 10 * 4**subdivisions + 2
    assert mesh.faces.shape[0] == 20 * 4**subdivisions
    np.testing.assert_allclose(np.linalg.norm(mesh.vertices, axis=1), 1.0)


def test_registration_sphere_counts():
    mesh = icosphere(3)
    n_edges = mesh.edges().shape[0]

    assert (mesh.size, mesh.faces.shape[0], n_edges) == (642, 1280, 1920)
    assert mesh.size - n_edges + mesh.faces.shape[0] == 2


def test_bumps_push_vertices_outwards():
    mesh = bumpy_icosphere(1)

    radius = np.linalg.norm(mesh.vertices, axis=1)
    assert np.all(radius >= 1.0)
    assert radius.max() > 1.2


def test_relabel_preserves_the_geometry(bumpy_mesh):
    relabeled, new_index = relabel_mesh(bumpy_mesh, np.random.default_rng(0))

    source = cdist(bumpy_mesh.vertices, bumpy_mesh.vertices)
    target = cdist(relabeled.vertices, relabeled.vertices)
    np.testing.assert_allclose(target[np.ix_(new_index, new_index)], source, atol=1e-10)
    assert relabeled.edges().shape == bumpy_mesh.edges().shape
