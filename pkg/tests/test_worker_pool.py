"""
Тесты пула исполнителей
"""

import threading
import time

import pytest

from experiments import WorkerPool


def _slow_square(x: int) -> int:
    time.sleep(0.001 * (5 - x % 5))
    return x * x


@pytest.mark.parametrize("workers", [1, 2, 8])
def test_map_preserves_order(workers):
    with WorkerPool(workers) as pool:
        assert pool.map(_slow_square, range(20)) == [x * x for x in range(20)]


def test_single_worker_runs_inline():
    with WorkerPool(1) as pool:
        names = pool.map(lambda _: threading.current_thread().name, range(3))
    assert set(names) == {threading.current_thread().name}


def test_task_errors_propagate():
    def fail_on_three(x):
        if x == 3:
            raise RuntimeError("boom")
        return x

    with WorkerPool(4) as pool:
        with pytest.raises(RuntimeError, match="boom"):
            pool.map(fail_on_three, range(6))


def test_pool_closes_and_rejects_bad_size():
    pool = WorkerPool(2)
    with pool:
        assert pool.map(abs, [-1, -2]) == [1, 2]
    assert pool._executor is None
    with pytest.raises(ValueError):
        WorkerPool(0)
