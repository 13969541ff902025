import logging
import os
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

from gyver.detours import exc

logger = logging.getLogger(__name__)

THREADS_ENV = 'GWDETOURS_THREADS'
DEFAULT_T_SCHEDULE = (1.0, 1e-1, 1e-2, 1e-3)


def thread_limit() -> int:
    """Worker threads allowed for internal parallelism, from `GWDETOURS_THREADS`."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return max(1, min(4, os.cpu_count() or 1))
    try:
        value = int(raw)
    except ValueError:
        logger.warning('ignoring unparsable %s=%r, running single-threaded', THREADS_ENV, raw)
        return 1
    if value < 1:
        logger.warning('ignoring %s=%d, running single-threaded', THREADS_ENV, value)
        return 1
    return value


def validate_schedule(t_values: Sequence[float]) -> tuple[float, ...]:
    schedule = tuple(float(t) for t in t_values)
    if not schedule:
        raise exc.sentence(exc.InvalidSchedule, 'the t-schedule is empty')
    if any(t <= 0 for t in schedule):
        raise exc.sentence(exc.InvalidSchedule, f't values must be positive, got {schedule}')
    if any(later >= earlier for earlier, later in zip(schedule, schedule[1:])):
        raise exc.sentence(
            exc.InvalidSchedule, f't values must be strictly decreasing, got {schedule}'
        )
    return schedule


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    output_dir: Path = Path('artifacts')
    n_points: int = 100
    t_schedule: tuple[float, ...] = field(default=DEFAULT_T_SCHEDULE)
    quantization: float = 0.0
    tol: float = 1e-9
    max_iter: int = 1000

    def __post_init__(self) -> None:
        if self.n_points < 1:
            raise exc.sentence(ValueError, f'n_points must be positive, got {self.n_points}')
        if self.quantization < 0:
            raise exc.sentence(
                ValueError, f'quantization must be non-negative, got {self.quantization}'
            )
        if self.tol <= 0:
            raise exc.sentence(ValueError, f'tol must be positive, got {self.tol}')
        if self.max_iter < 0:
            raise exc.sentence(ValueError, f'max_iter must be non-negative, got {self.max_iter}')
        object.__setattr__(self, 't_schedule', validate_schedule(self.t_schedule))
        object.__setattr__(self, 'output_dir', Path(self.output_dir))
