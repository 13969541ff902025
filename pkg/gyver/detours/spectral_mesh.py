"""Meshes, graph Laplacians, Fiedler vectors and spectral mesh registration.

Registration embeds every vertex by its Fiedler-vector value and solves the 1D
inner Gromov-Wasserstein problem between the two embeddings. Both monotone
directions are evaluated, so the sign ambiguity of the eigenvectors needs no
canonicalization.
"""

import logging
import warnings
from collections.abc import Iterator
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike
from scipy import sparse
from scipy.sparse import csgraph
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from gyver.detours import exc
from gyver.detours.concurrency import run_concurrently
from gyver.detours.enums import MeshFormat, RegistrationMethod, Weighting
from gyver.detours.functions import lazymethod
from gyver.detours.gw_1d import inner_gw_1d
from gyver.detours.gw_solver import DEFAULT_MAX_ITER, DEFAULT_TOL, solve_gw_cg
from gyver.detours.measures import Coupling, make_discrete_measure, orient_columns, uniform_weights

logger = logging.getLogger(__name__)

DENSE_EIGEN_LIMIT = 3000
FIEDLER_TOL = 1e-8
CONNECTIVITY_TOL = 1e-10
_SHIFT = -1e-3


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray
    faces: np.ndarray

    @property
    def size(self) -> int:
        return self.vertices.shape[0]

    @lazymethod
    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted vertex pairs."""
        pairs = np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]])
        pairs = np.sort(pairs, axis=1)
        return np.unique(pairs[pairs[:, 0] != pairs[:, 1]], axis=0)


def _check_connected(n: int, adjacency: sparse.sparray) -> None:
    components, _ = csgraph.connected_components(adjacency, directed=False)
    if components != 1:
        raise exc.sentence(exc.DisconnectedGraph, f'the graph on {n} vertices has {components} components')


def _edge_adjacency(n: int, edges: np.ndarray, weights: np.ndarray) -> sparse.csr_array:
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    values = np.concatenate([weights, weights])
    return sparse.csr_array((values, (rows, cols)), shape=(n, n))


def make_mesh(vertices: ArrayLike, faces: ArrayLike) -> Mesh:
    vertices = np.array(vertices, dtype=float, copy=True)
    faces = np.array(faces, dtype=int, copy=True).reshape(-1, 3)
    if vertices.ndim != 2 or vertices.shape[1] != 3:
        raise exc.sentence(exc.DimensionMismatch, f'vertices must be n×3, got {vertices.shape}')
    if not np.all(np.isfinite(vertices)):
        raise exc.sentence(exc.NonFiniteValue, 'vertex positions must be finite')
    n = vertices.shape[0]
    if faces.size and (faces.min() < 0 or faces.max() >= n):
        bad = faces[(faces < 0) | (faces >= n)][0]
        raise exc.sentence(exc.IndexOutOfRange, f'face index {bad} on a mesh of {n} vertices')
    vertices.setflags(write=False)
    faces.setflags(write=False)
    mesh = Mesh(vertices, faces)
    edges = mesh.edges()
    _check_connected(n, _edge_adjacency(n, edges, np.ones(edges.shape[0])))
    return mesh


def _tokens(lines: Iterator[str]) -> Iterator[list[str]]:
    for line in lines:
        content = line.split('#', 1)[0].split()
        if content:
            yield content


def _fan(polygon: list[int]) -> list[tuple[int, int, int]]:
    return [(polygon[0], polygon[i], polygon[i + 1]) for i in range(1, len(polygon) - 1)]


def _parse_polygon(fields: list[str], where: str) -> list[int]:
    count = int(fields[0])
    if count < 3 or len(fields) < count + 1:
        raise exc.sentence(exc.ParseError, f'{where}: malformed face {" ".join(fields)}')
    return [int(token) for token in fields[1 : count + 1]]


def _read_off(path: Path) -> tuple[np.ndarray, np.ndarray]:
    rows = _tokens(path.read_text().splitlines())
    header = next(rows, None)
    if not header or not header[0].endswith('OFF'):
        raise exc.sentence(exc.ParseError, f'{path} does not start with OFF')
    counts = header[1:] or next(rows, [])
    n_vertices, n_faces = int(counts[0]), int(counts[1])
    vertices = [[float(token) for token in next(rows)[:3]] for _ in range(n_vertices)]
    faces: list[tuple[int, int, int]] = []
    for _ in range(n_faces):
        faces.extend(_fan(_parse_polygon(next(rows), str(path))))
    return np.asarray(vertices), np.asarray(faces, dtype=int).reshape(-1, 3)


def _read_ply(path: Path) -> tuple[np.ndarray, np.ndarray]:
    lines = iter(path.read_text().splitlines())
    if next(lines, '').strip() != 'ply':
        raise exc.sentence(exc.ParseError, f'{path} does not start with ply')
    elements: list[tuple[str, int, list[str]]] = []
    for line in lines:
        fields = line.split()
        if not fields or fields[0] in ('comment', 'obj_info'):
            continue
        if fields[0] == 'format' and fields[1] != 'ascii':
            raise exc.sentence(exc.ParseError, f'{path} is {fields[1]}, only ascii PLY is read')
        elif fields[0] == 'element':
            elements.append((fields[1], int(fields[2]), []))
        elif fields[0] == 'property' and elements:
            elements[-1][2].append(fields[-1])
        elif fields[0] == 'end_header':
            break
    vertices: list[list[float]] = []
    faces: list[tuple[int, int, int]] = []
    for name, count, properties in elements:
        for _ in range(count):
            fields = next(lines).split()
            if name == 'vertex':
                columns = [properties.index(axis) for axis in ('x', 'y', 'z')]
                vertices.append([float(fields[column]) for column in columns])
            elif name == 'face':
                faces.extend(_fan(_parse_polygon(fields, str(path))))
    return np.asarray(vertices), np.asarray(faces, dtype=int).reshape(-1, 3)


def load_mesh(path: Path | str, mesh_format: MeshFormat | str | None = None) -> Mesh:
    """Read an OFF or ASCII PLY mesh; polygons are fan-triangulated."""
    path = Path(path)
    if mesh_format is None:
        mesh_format = MeshFormat.PLY_ASCII if path.suffix.lower() == '.ply' else MeshFormat.OFF
    reader = _read_ply if MeshFormat(mesh_format) is MeshFormat.PLY_ASCII else _read_off
    try:
        vertices, faces = reader(path)
    except (StopIteration, IndexError, ValueError) as err:
        raise exc.sentence(exc.ParseError, f'{path} is truncated or malformed') from err
    mesh = make_mesh(vertices, faces)
    logger.info('loaded %s: %d vertices, %d faces', path, mesh.size, mesh.faces.shape[0])
    return mesh


def edge_weights(mesh: Mesh, weighting: Weighting | str = Weighting.UNIT) -> np.ndarray:
    edges = mesh.edges()
    if Weighting(weighting) is Weighting.UNIT:
        return np.ones(edges.shape[0])
    lengths = np.linalg.norm(mesh.vertices[edges[:, 0]] - mesh.vertices[edges[:, 1]], axis=1)
    if np.any(lengths == 0):
        raise exc.sentence(exc.NonFiniteValue, 'inverse-distance weights need distinct vertex positions')
    return 1.0 / lengths


def adjacency_matrix(mesh: Mesh, weighting: Weighting | str = Weighting.UNIT) -> sparse.csr_array:
    return _edge_adjacency(mesh.size, mesh.edges(), edge_weights(mesh, weighting))


def graph_laplacian(
    n: int, edges: ArrayLike, weights: ArrayLike | None = None
) -> sparse.csr_array:
    """`L = D - W` of an undirected graph given by its edge list."""
    edges = np.asarray(edges, dtype=int).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= n):
        raise exc.sentence(exc.IndexOutOfRange, f'edge index out of range for {n} vertices')
    weights = np.ones(edges.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    adjacency = _edge_adjacency(n, edges, weights)
    _check_connected(n, adjacency)
    degrees = np.asarray(adjacency.sum(axis=1)).reshape(-1)
    return sparse.csr_array(sparse.diags_array(degrees) - adjacency)


def unnormalized_laplacian(
    mesh: Mesh, weighting: Weighting | str = Weighting.UNIT
) -> sparse.csr_array:
    return graph_laplacian(mesh.size, mesh.edges(), edge_weights(mesh, weighting))


def _smallest_eigenpairs(laplacian: sparse.sparray | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = laplacian.shape[0]
    count = min(3, n)
    if n <= DENSE_EIGEN_LIMIT:
        dense = laplacian.toarray() if sparse.issparse(laplacian) else np.asarray(laplacian)
        return scipy.linalg.eigh(dense, subset_by_index=[0, count - 1])
    try:
        values, vectors = eigsh(sparse.csc_array(laplacian), k=count, sigma=_SHIFT, which='LM')
    except (ArpackNoConvergence, ArpackError) as err:
        raise exc.sentence(exc.ConvergenceFailure, f'shift-invert Lanczos failed: {err}') from err
    order = np.argsort(values)
    return values[order], vectors[:, order]


def fiedler_pair(
    laplacian: sparse.sparray | np.ndarray, tol: float = FIEDLER_TOL
) -> tuple[float, np.ndarray]:
    """Second-smallest eigenvalue of a Laplacian and its unit eigenvector.

    The eigenvector is orthogonal to the constant vector and oriented so that
    its largest-magnitude entry is positive.
    """
    n = laplacian.shape[0]
    if n < 2:
        raise exc.sentence(exc.DimensionMismatch, 'a Fiedler vector needs at least two vertices')
    values, vectors = _smallest_eigenpairs(laplacian)
    scale = max(1.0, float(np.max(np.abs(values))))
    if values[1] <= CONNECTIVITY_TOL * scale:
        raise exc.sentence(exc.DisconnectedGraph, f'second eigenvalue {values[1]:.3e} vanishes')
    if n > 2 and abs(values[2] - values[1]) <= FIEDLER_TOL * scale:
        warnings.warn(
            f'Fiedler eigenvalue {values[1]:.6g} is repeated, the embedding is not unique',
            exc.DegenerateSpectrumWarning,
            stacklevel=2,
        )
    vector = vectors[:, 1] - vectors[:, 1].mean()
    vector = orient_columns((vector / np.linalg.norm(vector)).reshape(-1, 1))[:, 0]
    value = float(vector @ (laplacian @ vector))
    residual = float(np.linalg.norm(laplacian @ vector - value * vector))
    if residual > tol:
        raise exc.sentence(
            exc.ConvergenceFailure, f'Fiedler residual {residual:.3e} exceeds {tol:.1e}'
        )
    logger.debug('fiedler value %.10g, residual %.3e', value, residual)
    return value, vector


def fiedler_vector(laplacian: sparse.sparray | np.ndarray, tol: float = FIEDLER_TOL) -> np.ndarray:
    return fiedler_pair(laplacian, tol)[1]


@dataclass(frozen=True, eq=False)
class Assignment:
    mapping: np.ndarray
    accuracy: float | None = None


def assignment_from_coupling(coupling: Coupling) -> np.ndarray:
    """Target of the heaviest entry of every row; ties go to the lowest index."""
    rows, cols, masses = coupling.support()
    mapping = np.zeros(coupling.shape[0], dtype=int)
    order = np.lexsort((cols, -masses, rows))
    first_rows, first = np.unique(rows[order], return_index=True)
    mapping[first_rows] = cols[order][first]
    return mapping


def mapping_accuracy(mapping: np.ndarray, ground_truth: ArrayLike, n_targets: int) -> float:
    truth = np.asarray(ground_truth, dtype=int).reshape(-1)
    if truth.shape[0] != mapping.shape[0]:
        raise exc.sentence(
            exc.SizeMismatch,
            f'ground truth has {truth.shape[0]} entries for {mapping.shape[0]} source vertices',
        )
    if truth.size and (truth.min() < 0 or truth.max() >= n_targets):
        raise exc.sentence(exc.IndexOutOfRange, f'ground truth index out of range for {n_targets} vertices')
    return float(np.mean(mapping == truth))


def register_meshes(
    src: Mesh,
    dst: Mesh,
    ground_truth: ArrayLike | None = None,
    *,
    method: RegistrationMethod | str = RegistrationMethod.FIEDLER,
    weighting: Weighting | str = Weighting.INVERSE_DISTANCE,
    tol: float = FIEDLER_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    cg_tol: float = DEFAULT_TOL,
    limit: int | None = None,
) -> Assignment:
    """Map every source vertex to a target vertex."""
    method = RegistrationMethod(method)
    if method is RegistrationMethod.FIEDLER:
        embeddings = run_concurrently(
            [
                lambda: fiedler_vector(unnormalized_laplacian(src, weighting), tol),
                lambda: fiedler_vector(unnormalized_laplacian(dst, weighting), tol),
            ],
            limit,
        )
        choice = inner_gw_1d(
            make_discrete_measure(embeddings[0].reshape(-1, 1)),
            make_discrete_measure(embeddings[1].reshape(-1, 1)),
        )
        logger.info('fiedler registration: %s pairing, cost %.6g', choice.direction, choice.cost)
        coupling = choice.coupling
    else:
        report = solve_gw_cg(
            adjacency_matrix(src, weighting).toarray(),
            adjacency_matrix(dst, weighting).toarray(),
            uniform_weights(src.size),
            uniform_weights(dst.size),
            max_iter=max_iter,
            tol=cg_tol,
        )
        coupling = report.coupling
    mapping = assignment_from_coupling(coupling)
    accuracy = None if ground_truth is None else mapping_accuracy(mapping, ground_truth, dst.size)
    if accuracy is not None:
        logger.info('%s registration accuracy %.4f', method, accuracy)
    return Assignment(mapping, accuracy)


def read_correspondence(path: Path | str) -> np.ndarray:
    """One target vertex index per line."""
    try:
        return np.loadtxt(path, dtype=int, ndmin=1, comments='#')
    except ValueError as err:
        raise exc.sentence(exc.ParseError, f'{path}: {err}') from err


def write_mapping(path: Path | str, mapping: ArrayLike) -> None:
    mapping = np.asarray(mapping, dtype=int)
    data = np.column_stack((np.arange(mapping.shape[0]), mapping))
    np.savetxt(path, data, fmt='%d', delimiter=',', header='src_index,dst_index', comments='')


def write_off(path: Path | str, mesh: Mesh) -> None:
    lines = ['OFF', f'{mesh.size} {mesh.faces.shape[0]} {mesh.edges().shape[0]}']
    lines.extend(' '.join(f'{value:.17g}' for value in vertex) for vertex in mesh.vertices)
    lines.extend(f'3 {a} {b} {c}' for a, b, c in mesh.faces)
    Path(path).write_text('\n'.join(lines) + '\n')
