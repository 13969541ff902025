"""Synthetic fixtures for the experiments.

Every generator draws from `numpy.random.default_rng(seed)` (PCG64), so a seed
fixes the data bit for bit.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from gyver.detours.measures import DiscreteMeasure, make_discrete_measure
from gyver.detours.spectral_mesh import Mesh, make_mesh

DEFAULT_BUMPS = (
    ((0.3, 0.5, 0.8), 0.45, 0.35),
    ((-0.7, 0.2, -0.1), 0.25, 0.25),
)


@dataclass(frozen=True, eq=False)
class MatchedPair:
    """Two measures with the index of each source atom's counterpart in the target."""

    source: DiscreteMeasure
    target: DiscreteMeasure
    ground_truth: np.ndarray


def rotation_2d(angle: float) -> np.ndarray:
    cos, sin = np.cos(angle), np.sin(angle)
    return np.array([[cos, -sin], [sin, cos]])


def moons_pair(
    n: int = 100, seed: int = 0, noise: float = 0.05, angle: float = np.pi / 2
) -> MatchedPair:
    """One noisy moon and a rotated, shuffled copy of it."""
    rng = np.random.default_rng(seed)
    theta = np.linspace(0.0, np.pi, n)
    points = np.column_stack((np.cos(theta), np.sin(theta)))
    points = points + noise * rng.standard_normal(points.shape)
    order = rng.permutation(n)
    rotated = points[order] @ rotation_2d(angle).T
    return MatchedPair(
        source=make_discrete_measure(points),
        target=make_discrete_measure(rotated),
        ground_truth=np.argsort(order),
    )


def gaussian_pair(n: int = 30, seed: int = 0) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    """Samples of N((2, 0), diag(1, 1/4)) and N((-2, 0), diag(1, 1/4))."""
    rng = np.random.default_rng(seed)
    scale = np.array([1.0, 0.5])
    source = np.array([2.0, 0.0]) + scale * rng.standard_normal((n, 2))
    target = np.array([-2.0, 0.0]) + scale * rng.standard_normal((n, 2))
    return make_discrete_measure(source), make_discrete_measure(target)


def _icosahedron() -> tuple[np.ndarray, np.ndarray]:
    golden = (1.0 + np.sqrt(5.0)) / 2.0
    vertices = np.array(
        [
            [-1, golden, 0], [1, golden, 0], [-1, -golden, 0], [1, -golden, 0],
            [0, -1, golden], [0, 1, golden], [0, -1, -golden], [0, 1, -golden],
            [golden, 0, -1], [golden, 0, 1], [-golden, 0, -1], [-golden, 0, 1],
        ],
        dtype=float,
    )
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ]
    )
    return vertices / np.linalg.norm(vertices, axis=1, keepdims=True), faces


def icosphere(subdivisions: int = 3) -> Mesh:
    """Unit sphere from a subdivided icosahedron: `10·4^s + 2` vertices."""
    vertices, faces = _icosahedron()
    points = list(vertices)
    for _ in range(subdivisions):
        midpoints: dict[tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (min(a, b), max(a, b))
            if key not in midpoints:
                middle = points[a] + points[b]
                points.append(middle / np.linalg.norm(middle))
                midpoints[key] = len(points) - 1
            return midpoints[key]

        refined = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            refined.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]])
        faces = np.asarray(refined)
    return make_mesh(np.asarray(points), faces)


def bumpy_icosphere(
    subdivisions: int = 3,
    bumps: tuple[tuple[tuple[float, float, float], float, float], ...] = DEFAULT_BUMPS,
) -> Mesh:
    """Icosphere pushed out radially by Gaussian bumps `(center, height, width)`."""
    sphere = icosphere(subdivisions)
    radius = np.ones(sphere.size)
    for center, height, width in bumps:
        center = np.asarray(center, dtype=float)
        center = center / np.linalg.norm(center)
        distances = np.sum((sphere.vertices - center) ** 2, axis=1)
        radius += height * np.exp(-distances / (2.0 * width**2))
    return make_mesh(sphere.vertices * radius[:, None], sphere.faces)


def relabel_mesh(mesh: Mesh, rng: np.random.Generator) -> tuple[Mesh, np.ndarray]:
    """Randomly permute and rotate a mesh; returns it with each old vertex's new index."""
    order = rng.permutation(mesh.size)
    new_index = np.argsort(order)
    rotation = Rotation.random(random_state=rng)
    relabeled = make_mesh(rotation.apply(mesh.vertices[order]), new_index[mesh.faces])
    return relabeled, new_index
