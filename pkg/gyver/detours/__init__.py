__version__ = '0.1.1'

from . import enums, exc, json, strings
from .concurrency import run_concurrently
from .enums import (
    DetourMode,
    Direction,
    GWLoss,
    MeshFormat,
    RegistrationMethod,
    SubspaceSolver,
    Weighting,
)
from .exact_ot import (
    KantorovichSolution,
    monotone_plan,
    solve_kantorovich,
    sqeuclidean_cost,
    wasserstein_1d_coupling,
)
from .gaussian import (
    AffineMap,
    BlockPartition,
    MongeKnotheMap,
    ggw_map,
    mi_gaussian_plan,
    mk_gaussian_map,
    partition_covariance,
    schur_complement,
)
from .gw_1d import MonotoneChoice, inner_gw_1d, inner_gw_1d_arrays
from .gw_solver import (
    CGReport,
    conditional_gradient,
    gram_matrix,
    gw_energy,
    gw_tensor_product,
    solve_gw_cg,
    squared_distance_matrix,
)
from .hadamard import (
    HWInstance,
    degenerate_weights,
    hw_distance,
    hw_energy,
    hw_t_schedule,
    hw_tensor_product,
    make_hw_instance,
    solve_hw,
)
from .kr import TriangularCoupling, alternate_kr, classical_kr
from .measures import (
    Coupling,
    DiscreteMeasure,
    GaussianMeasure,
    Subspace,
    coordinate_subspace,
    full_subspace,
    make_coupling,
    make_discrete_measure,
    make_gaussian,
    make_subspace,
    pca_subspace,
    project_measure,
    reassemble,
    split_coordinates,
    subspace_from_vectors,
    total_variation,
)
from .spectral_mesh import (
    Assignment,
    Mesh,
    fiedler_pair,
    fiedler_vector,
    graph_laplacian,
    load_mesh,
    make_mesh,
    register_meshes,
    unnormalized_laplacian,
)
from .subspace_detour import (
    DetourPlan,
    Disintegration,
    aggregate_by_bins,
    detour_energy,
    disintegrate,
    monge_independent,
    monge_knothe,
    subspace_optimal_plan,
)

__all__ = [
    'AffineMap',
    'Assignment',
    'BlockPartition',
    'CGReport',
    'Coupling',
    'DetourMode',
    'DetourPlan',
    'Direction',
    'DiscreteMeasure',
    'Disintegration',
    'GWLoss',
    'GaussianMeasure',
    'HWInstance',
    'KantorovichSolution',
    'Mesh',
    'MeshFormat',
    'MongeKnotheMap',
    'MonotoneChoice',
    'RegistrationMethod',
    'Subspace',
    'SubspaceSolver',
    'TriangularCoupling',
    'Weighting',
    'aggregate_by_bins',
    'alternate_kr',
    'classical_kr',
    'conditional_gradient',
    'coordinate_subspace',
    'degenerate_weights',
    'detour_energy',
    'disintegrate',
    'enums',
    'exc',
    'fiedler_pair',
    'fiedler_vector',
    'full_subspace',
    'ggw_map',
    'gram_matrix',
    'graph_laplacian',
    'gw_energy',
    'gw_tensor_product',
    'hw_distance',
    'hw_energy',
    'hw_t_schedule',
    'hw_tensor_product',
    'inner_gw_1d',
    'inner_gw_1d_arrays',
    'json',
    'load_mesh',
    'make_coupling',
    'make_discrete_measure',
    'make_gaussian',
    'make_hw_instance',
    'make_mesh',
    'make_subspace',
    'mi_gaussian_plan',
    'mk_gaussian_map',
    'monge_independent',
    'monge_knothe',
    'monotone_plan',
    'partition_covariance',
    'pca_subspace',
    'project_measure',
    'reassemble',
    'register_meshes',
    'run_concurrently',
    'schur_complement',
    'solve_gw_cg',
    'solve_hw',
    'solve_kantorovich',
    'split_coordinates',
    'sqeuclidean_cost',
    'squared_distance_matrix',
    'strings',
    'subspace_from_vectors',
    'subspace_optimal_plan',
    'total_variation',
    'unnormalized_laplacian',
    'wasserstein_1d_coupling',
]
