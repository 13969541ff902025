import asyncio
import threading

import pytest
from exceptiongroup import ExceptionGroup

from gyver.detours.concurrency import run_concurrently


def test_results_keep_submission_order():
    tasks = [lambda value=value: value * value for value in range(10)]

    assert run_concurrently(tasks, limit=4) == [value * value for value in range(10)]


def test_runs_on_worker_threads():
    main = threading.get_ident()
    idents = run_concurrently([threading.get_ident, threading.get_ident], limit=2)

    assert all(ident != main for ident in idents)


def test_limit_one_runs_inline():
    main = threading.get_ident()

    assert run_concurrently([threading.get_ident, threading.get_ident], limit=1) == [
        main,
        main,
    ]


def test_empty_task_list():
    assert run_concurrently([], limit=3) == []


def test_single_failure_is_reraised():
    def fail():
        raise KeyError('cell')

    with pytest.raises(KeyError):
        run_concurrently([lambda: 1, fail], limit=2)


def test_many_failures_are_grouped():
    def fail():
        raise KeyError('cell')

    with pytest.raises(ExceptionGroup) as info:
        run_concurrently([fail, fail, lambda: 1], limit=3)

    assert len(info.value.exceptions) == 2


def test_inside_running_loop_falls_back_to_loop():
    async def main():
        return run_concurrently([lambda: 1, lambda: 2], limit=2)

    assert asyncio.run(main()) == [1, 2]
