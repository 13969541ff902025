"""`gwdetours` command line: one subcommand per experiment.

Artifacts (CSV matrices, JSON summaries) depend only on the inputs and the
seed. Wall-clock timings are printed to stdout and never written to them.
"""

import argparse
import logging
import sys
import time
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import exceptiongroup
import numpy as np

from gyver.detours import exc, json
from gyver.detours.config import DEFAULT_T_SCHEDULE, ExperimentConfig
from gyver.detours.datasets import gaussian_pair, moons_pair
from gyver.detours.enums import RegistrationMethod, SubspaceSolver, Weighting
from gyver.detours.gaussian import ggw_map, mi_gaussian_plan, mk_gaussian_map
from gyver.detours.gw_1d import inner_gw_1d
from gyver.detours.gw_solver import solve_gw_cg, squared_distance_matrix
from gyver.detours.hadamard import hw_t_schedule, make_hw_instance
from gyver.detours.kr import alternate_kr
from gyver.detours.measures import (
    Coupling,
    DiscreteMeasure,
    GaussianMeasure,
    Subspace,
    coordinate_subspace,
    make_gaussian,
    make_subspace,
    pca_subspace,
    project_measure,
    total_variation,
    write_point_cloud,
)
from gyver.detours.spectral_mesh import (
    assignment_from_coupling,
    load_mesh,
    mapping_accuracy,
    read_correspondence,
    register_meshes,
    write_mapping,
)
from gyver.detours.strings import float_separator
from gyver.detours.subspace_detour import (
    detour_energy,
    monge_knothe,
    subspace_optimal_plan,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def write_matrix(path: Path, matrix: np.ndarray) -> None:
    np.savetxt(path, matrix, delimiter=',', fmt='%.17g')


def _experiment_dir(config: ExperimentConfig, name: str) -> Path:
    target = config.output_dir / name
    target.mkdir(parents=True, exist_ok=True)
    return target


def _report_time(name: str, started: float) -> None:
    elapsed = time.perf_counter() - started
    print(f'{name}: finished in {elapsed:.3f}s')
    logger.info('%s finished in %.3fs', name, elapsed)


def _accuracy(coupling: Coupling, ground_truth: np.ndarray) -> float:
    return mapping_accuracy(assignment_from_coupling(coupling), ground_truth, coupling.shape[1])


def _detour(
    source: DiscreteMeasure,
    target: DiscreteMeasure,
    config: ExperimentConfig,
    e_subspace: Subspace,
    f_subspace: Subspace,
) -> Coupling:
    plan = subspace_optimal_plan(
        source,
        target,
        e_subspace,
        f_subspace,
        SubspaceSolver.INNER_GW_1D,
        quantization=config.quantization,
    )
    lifted = monge_knothe(
        source,
        target,
        e_subspace,
        f_subspace,
        plan,
        quantization=config.quantization,
        max_iter=config.max_iter,
        tol=config.tol,
    )
    return lifted.full_plan


def cmd_moons(config: ExperimentConfig, noise: float = 0.05) -> dict[str, Any]:
    started = time.perf_counter()
    pair = moons_pair(config.n_points, config.seed, noise)
    source, target = pair.source, pair.target
    out = _experiment_dir(config, 'moons')
    write_point_cloud(out / 'source.csv', source)
    write_point_cloud(out / 'target.csv', target)

    report = solve_gw_cg(
        squared_distance_matrix(source.points),
        squared_distance_matrix(target.points),
        source.weights,
        target.weights,
        max_iter=config.max_iter,
        tol=config.tol,
    )
    axis = coordinate_subspace(2, [0])
    couplings = {
        'gw': report.coupling,
        'shared_axis': _detour(source, target, config, axis, axis),
        'pca': _detour(source, target, config, pca_subspace(source, 1), pca_subspace(target, 1)),
    }
    for name, coupling in couplings.items():
        write_matrix(out / f'coupling_{name}.csv', coupling.dense())
    summary = {
        'n_points': config.n_points,
        'seed': config.seed,
        'noise': noise,
        'quantization': config.quantization,
        'gw_iterations': report.iterations,
        'accuracy': {
            name: _accuracy(coupling, pair.ground_truth) for name, coupling in couplings.items()
        },
        'energy': {
            name: detour_energy(coupling, source, target) for name, coupling in couplings.items()
        },
    }
    json.write_json(out / 'summary.json', summary)
    _report_time('moons', started)
    return summary


def cmd_hw_degeneration(config: ExperimentConfig) -> dict[str, Any]:
    started = time.perf_counter()
    source, target = gaussian_pair(config.n_points, config.seed)
    out = _experiment_dir(config, 'hw-degeneration')
    write_point_cloud(out / 'source.csv', source)
    write_point_cloud(out / 'target.csv', target)

    reports = hw_t_schedule(
        make_hw_instance(source, target),
        config.t_schedule,
        max_iter=config.max_iter,
        tol=config.tol,
    )
    reference = alternate_kr(source, target, config.quantization)
    first_axis = coordinate_subspace(source.dim, [0])
    one_dimensional = inner_gw_1d(
        project_measure(source, first_axis), project_measure(target, first_axis)
    )
    for index, report in enumerate(reports):
        write_matrix(out / f'coupling_t{index}.csv', report.coupling.dense())
    write_matrix(out / 'coupling_alternate_kr.csv', reference.coupling.dense())
    summary = {
        'n_points': config.n_points,
        'seed': config.seed,
        't_schedule': list(config.t_schedule),
        'energy': [report.energy for report in reports],
        'iterations': [report.iterations for report in reports],
        'tv_to_alternate_kr': [
            total_variation(report.coupling, reference.coupling) for report in reports
        ],
        'tv_to_first_axis_inner_gw': total_variation(
            reports[-1].coupling, one_dimensional.coupling
        ),
        'first_axis_direction': one_dimensional.direction,
        'level_directions': list(reference.level_directions),
    }
    json.write_json(out / 'summary.json', summary)
    _report_time('hw-degeneration', started)
    return summary


def cmd_mesh_register(
    config: ExperimentConfig,
    src_path: Path,
    dst_path: Path,
    gt_path: Path | None = None,
    method: RegistrationMethod = RegistrationMethod.FIEDLER,
    weighting: Weighting = Weighting.INVERSE_DISTANCE,
) -> dict[str, Any]:
    started = time.perf_counter()
    src, dst = load_mesh(src_path), load_mesh(dst_path)
    ground_truth = None if gt_path is None else read_correspondence(gt_path)
    assignment = register_meshes(
        src,
        dst,
        ground_truth,
        method=method,
        weighting=weighting,
        max_iter=config.max_iter,
        cg_tol=config.tol,
    )
    out = _experiment_dir(config, 'register')
    write_mapping(out / 'mapping.csv', assignment.mapping)
    summary = {
        'method': method,
        'weighting': weighting,
        'n_src': src.size,
        'n_dst': dst.size,
        'accuracy': assignment.accuracy,
    }
    json.write_json(out / 'summary.json', summary)
    if assignment.accuracy is not None:
        print(f'register: accuracy {assignment.accuracy:.4f}')
    _report_time('register', started)
    return summary


def _gaussian_spec(data: dict[str, Any], key: str) -> GaussianMeasure:
    try:
        entry = data[key]
        return make_gaussian(entry['mean'], entry['covariance'])
    except (KeyError, TypeError) as err:
        raise exc.sentence(exc.ParseError, f'gaussian input needs {key}.mean and {key}.covariance') from err


def cmd_gauss(input_path: Path) -> dict[str, Any]:
    """Closed forms for the two Gaussians described in `input_path`.

    The JSON holds `mu` and `nu` (each `mean`, `covariance`), the subspace
    dimension `k` (default 1) and optional `e_basis`/`f_basis` columns; without
    bases, E and F span the first `k` coordinate axes.
    """
    data = json.read_json(Path(input_path))
    mu, nu = _gaussian_spec(data, 'mu'), _gaussian_spec(data, 'nu')
    k = int(data.get('k', 1))
    e_subspace = (
        make_subspace(data['e_basis']) if 'e_basis' in data else coordinate_subspace(mu.dim, range(k))
    )
    f_subspace = (
        make_subspace(data['f_basis']) if 'f_basis' in data else coordinate_subspace(nu.dim, range(k))
    )
    ggw = ggw_map(mu, nu)
    mk = mk_gaussian_map(mu, nu, e_subspace, f_subspace)
    report: dict[str, Any] = {
        'ggw': {
            'linear': ggw.linear,
            'offset': ggw.offset,
            'residual': ggw.pushforward_residual(mu.covariance, nu.covariance),
        },
        'monge_knothe': {
            'linear': mk.affine.linear,
            'offset': mk.affine.offset,
            'local': mk.local,
            'c': mk.c,
            'residual': mk.affine.pushforward_residual(mu.covariance, nu.covariance),
        },
    }
    try:
        joint = mi_gaussian_plan(mu, nu, e_subspace, f_subspace)
    except exc.NotCentered as err:
        report['monge_independent'] = {'skipped': str(err)}
    else:
        report['monge_independent'] = {
            'covariance': joint.covariance,
            'min_eigenvalue': float(np.linalg.eigvalsh(joint.covariance)[0]),
        }
    print(json.dumps(report, indent=True))
    return report


def _common(parser: argparse.ArgumentParser, n_points: int | None = None) -> None:
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--out', type=Path, default=Path('artifacts'))
    if n_points is not None:
        parser.add_argument('--n-points', type=int, default=n_points)
    parser.add_argument('--quantization', type=float, default=0.0)
    parser.add_argument('--tol', type=float, default=1e-9)
    parser.add_argument('--max-iter', type=int, default=1000)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='gwdetours', description='Subspace detours for Gromov-Wasserstein experiments.'
    )
    parser.add_argument(
        '--log-level',
        default='WARNING',
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
        type=str.upper,
    )
    commands = parser.add_subparsers(dest='command', required=True)

    moons = commands.add_parser('moons', help='moon against its rotated copy')
    _common(moons, 100)
    moons.add_argument('--noise', type=float, default=0.05)

    degeneration = commands.add_parser('hw-degeneration', help='degenerated HW solves')
    _common(degeneration, 30)
    degeneration.add_argument(
        '--t-schedule', type=float_separator, default=DEFAULT_T_SCHEDULE
    )

    register = commands.add_parser('register', help='register two meshes')
    _common(register)
    register.add_argument('src', type=Path)
    register.add_argument('dst', type=Path)
    register.add_argument('--ground-truth', type=Path, default=None)
    register.add_argument('--method', type=RegistrationMethod, default=RegistrationMethod.FIEDLER)
    register.add_argument('--weighting', type=Weighting, default=Weighting.INVERSE_DISTANCE)

    gauss = commands.add_parser('gauss', help='Gaussian closed forms')
    gauss.add_argument('--input', type=Path, required=True)
    return parser


def _config(args: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig(
        seed=args.seed,
        output_dir=args.out,
        n_points=getattr(args, 'n_points', 100),
        t_schedule=getattr(args, 't_schedule', DEFAULT_T_SCHEDULE),
        quantization=args.quantization,
        tol=args.tol,
        max_iter=args.max_iter,
    )


def run(args: argparse.Namespace) -> None:
    if args.command == 'gauss':
        cmd_gauss(args.input)
        return
    config = _config(args)
    if args.command == 'moons':
        cmd_moons(config, args.noise)
    elif args.command == 'hw-degeneration':
        cmd_hw_degeneration(config)
    else:
        cmd_mesh_register(
            config, args.src, args.dst, args.ground_truth, args.method, args.weighting
        )


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format=LOG_FORMAT, stream=sys.stderr)
    try:
        run(args)
    except (exc.DetoursError, OSError, ValueError) as err:
        print(f'gwdetours: error: {err}', file=sys.stderr)
        return 1
    except exceptiongroup.ExceptionGroup as group:
        for err in group.exceptions:
            print(f'gwdetours: error: {err}', file=sys.stderr)
        return 1
    return 0
