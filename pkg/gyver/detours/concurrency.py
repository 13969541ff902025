import asyncio
from collections.abc import Callable, Sequence
from typing import TypeVar

import exceptiongroup

from gyver.detours.config import thread_limit

T = TypeVar('T')


def _has_running_loop() -> bool:
    try:
        asyncio.get_running_loop()
    except RuntimeError:
        return False
    return True


async def _gather(tasks: Sequence[Callable[[], T]], limit: int) -> list[T]:
    semaphore = asyncio.Semaphore(limit)

    async def _run(task: Callable[[], T]) -> T:
        async with semaphore:
            return await asyncio.to_thread(task)

    outcomes = await asyncio.gather(*(_run(task) for task in tasks), return_exceptions=True)
    errors = [item for item in outcomes if isinstance(item, Exception)]
    if len(errors) == 1:
        raise errors[0]
    if errors:
        raise exceptiongroup.ExceptionGroup('concurrent solves failed', errors)
    return list(outcomes)  # type: ignore[arg-type]


def run_concurrently(tasks: Sequence[Callable[[], T]], limit: int | None = None) -> list[T]:
    """Run zero-argument callables on worker threads, results in submission order.

    Falls back to a plain loop for a single task, a limit of one, or when called
    from inside a running event loop.
    """
    limit = thread_limit() if limit is None else max(1, limit)
    if limit == 1 or len(tasks) <= 1 or _has_running_loop():
        return [task() for task in tasks]
    return asyncio.run(_gather(tasks, limit))
